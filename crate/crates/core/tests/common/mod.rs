#![allow(dead_code)]

use multiprio::gen::GenConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Oracle-sized shape: up to `max_students` students, 1..=3 schools.
pub fn small_config(rng: &mut ChaCha8Rng, max_students: usize) -> GenConfig {
    GenConfig {
        students: rng.gen_range(1..=max_students),
        schools: rng.gen_range(1..=3),
        max_capacity: 2,
    }
}
