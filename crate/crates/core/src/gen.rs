//! Seeded random instances and priority profiles for property tests and the
//! `gen` command.

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::combine::{MultiProfile, PrioritySet};
use crate::improvements::{is_strict_improvement, more_improves};
use crate::market::{Instance, Priorities, School, SchoolId};
use crate::relations::{Relation, StudentId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("no qualifying sample found within {0} attempts")]
    Exhausted(usize),
    #[error("instance needs at least one student and one school")]
    Empty,
}

/// Shape of generated instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenConfig {
    pub students: usize,
    pub schools: usize,
    pub max_capacity: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig { students: 5, schools: 3, max_capacity: 2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriorityKind {
    Total,
    Weak,
    Partial,
}

pub fn random_total<R: Rng>(n: usize, rng: &mut R) -> Relation {
    let mut ids: Vec<StudentId> = (0..n).map(StudentId).collect();
    ids.shuffle(rng);
    Relation::from_ranking(n, &ids).expect("a permutation is a ranking")
}

/// Students dropped into up to `n` ordered tiers.
pub fn random_weak<R: Rng>(n: usize, rng: &mut R) -> Relation {
    let levels = rng.gen_range(1..=n.max(1));
    let mut tiers = vec![Vec::new(); levels];
    for i in 0..n {
        tiers[rng.gen_range(0..levels)].push(StudentId(i));
    }
    tiers.retain(|t: &Vec<StudentId>| !t.is_empty());
    Relation::from_tiers(n, &tiers).expect("tiers partition the students")
}

/// Transitive closure of random forward edges along a random permutation.
pub fn random_partial<R: Rng>(n: usize, rng: &mut R) -> Relation {
    let mut ids: Vec<usize> = (0..n).collect();
    ids.shuffle(rng);
    let density: f64 = rng.gen_range(0.1..0.6);
    let mut reach = vec![vec![false; n]; n];
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(density) {
                reach[ids[a]][ids[b]] = true;
            }
        }
    }
    for k in 0..n {
        for a in 0..n {
            if reach[a][k] {
                let via = reach[k].clone();
                for (dst, &hop) in reach[a].iter_mut().zip(&via) {
                    *dst |= hop;
                }
            }
        }
    }
    let pairs = (0..n).flat_map(|a| (0..n).map(move |b| (a, b)));
    let pairs: Vec<_> = pairs
        .filter(|&(a, b)| reach[a][b])
        .map(|(a, b)| (StudentId(a), StudentId(b)))
        .collect();
    Relation::from_pairs(n, pairs).expect("closure of a DAG is irreflexive")
}

pub fn random_order<R: Rng>(kind: PriorityKind, n: usize, rng: &mut R) -> Relation {
    match kind {
        PriorityKind::Total => random_total(n, rng),
        PriorityKind::Weak => random_weak(n, rng),
        PriorityKind::Partial => random_partial(n, rng),
    }
}

/// Each student ranks a random subset of schools, possibly empty.
pub fn random_preferences<R: Rng>(cfg: &GenConfig, rng: &mut R) -> Vec<Vec<SchoolId>> {
    (0..cfg.students)
        .map(|_| {
            let mut all: Vec<SchoolId> = (0..cfg.schools).map(SchoolId).collect();
            all.shuffle(rng);
            let len = rng.gen_range(0..=cfg.schools);
            all.truncate(len);
            all
        })
        .collect()
}

fn skeleton<R: Rng>(
    cfg: &GenConfig,
    priorities: Priorities,
    rng: &mut R,
) -> Result<Instance, GenError> {
    if cfg.students == 0 || cfg.schools == 0 {
        return Err(GenError::Empty);
    }
    let schools = (0..cfg.schools)
        .map(|k| School {
            name: format!("s{}", k + 1),
            capacity: rng.gen_range(1..=cfg.max_capacity.max(1)),
        })
        .collect();
    let students = (0..cfg.students).map(|k| format!("i{}", k + 1)).collect();
    let prefs = random_preferences(cfg, rng);
    Ok(Instance::new(students, schools, prefs, priorities).expect("generated instances are valid"))
}

/// Instance with one relation of the given kind per school.
pub fn random_instance<R: Rng>(
    cfg: &GenConfig,
    kind: PriorityKind,
    rng: &mut R,
) -> Result<Instance, GenError> {
    let profile = (0..cfg.schools)
        .map(|_| random_order(kind, cfg.students, rng))
        .collect();
    skeleton(cfg, Priorities::Single(profile), rng)
}

/// Instance whose schools each hold 1..=`max_orders` weak orders. With
/// `with_total`, one of every school's orders (at a random position) is total.
pub fn random_multi_instance<R: Rng>(
    cfg: &GenConfig,
    max_orders: usize,
    with_total: bool,
    rng: &mut R,
) -> Result<Instance, GenError> {
    let sets = (0..cfg.schools)
        .map(|s| {
            let k = rng.gen_range(1..=max_orders.max(1));
            let mut orders: Vec<Relation> = (0..k).map(|_| random_weak(cfg.students, rng)).collect();
            if with_total {
                let at = rng.gen_range(0..k);
                orders[at] = random_total(cfg.students, rng);
            }
            PrioritySet::new(SchoolId(s), orders).expect("orders share the ground set")
        })
        .collect();
    skeleton(cfg, Priorities::Multi(MultiProfile::new(sets)), rng)
}

/// Base profile, two candidate profiles and the group they favour.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImprovementTriple {
    pub base: Vec<Relation>,
    pub more: Vec<Relation>,
    pub less: Vec<Relation>,
    pub group: Vec<StudentId>,
}

fn ranking_by_score(scores: &[i64]) -> Relation {
    let mut ids: Vec<StudentId> = (0..scores.len()).map(StudentId).collect();
    ids.sort_by_key(|i| (-scores[i.0], i.0));
    Relation::from_ranking(scores.len(), &ids).expect("sorted ids form a ranking")
}

fn random_group<R: Rng>(n: usize, rng: &mut R) -> Vec<StudentId> {
    loop {
        let g: Vec<StudentId> = (0..n).filter(|_| rng.gen_bool(0.5)).map(StudentId).collect();
        if !g.is_empty() {
            return g;
        }
    }
}

/// Exam scores per school plus group bonuses. Members get a random bonus in
/// the less improved profile and that bonus plus a random extra in the more
/// improved one. Larger bonuses alone do not guarantee monotonicity, so
/// samples are kept only when "more improves" actually holds.
pub fn improvement_triple<R: Rng>(
    students: usize,
    schools: usize,
    budget: usize,
    rng: &mut R,
) -> Result<ImprovementTriple, GenError> {
    for _ in 0..budget {
        let group = random_group(students, rng);
        let bonus_less: Vec<i64> = (0..students)
            .map(|i| if group.contains(&StudentId(i)) { rng.gen_range(0..=40) } else { 0 })
            .collect();
        let bonus_more: Vec<i64> = bonus_less
            .iter()
            .enumerate()
            .map(|(i, &b)| if group.contains(&StudentId(i)) { b + rng.gen_range(0..=30) } else { 0 })
            .collect();
        let mut base = Vec::new();
        let mut more = Vec::new();
        let mut less = Vec::new();
        for _ in 0..schools {
            let score: Vec<i64> = (0..students).map(|_| rng.gen_range(0..100)).collect();
            let add = |b: &[i64]| score.iter().zip(b).map(|(x, y)| x + y).collect::<Vec<_>>();
            base.push(ranking_by_score(&score));
            less.push(ranking_by_score(&add(&bonus_less)));
            more.push(ranking_by_score(&add(&bonus_more)));
        }
        if more_improves(&base, &more, &less, &group).unwrap_or(false) {
            return Ok(ImprovementTriple { base, more, less, group });
        }
    }
    Err(GenError::Exhausted(budget))
}

/// Moves members of `group` up past students outside it, one adjacent swap
/// at a time. The result is a strict improvement of `r` for the group.
fn promote<R: Rng>(r: &Relation, group: &[StudentId], swaps: usize, rng: &mut R) -> Relation {
    let mut ranking = r.ranking().expect("promote works on total orders");
    for _ in 0..swaps {
        let spots: Vec<usize> = (1..ranking.len())
            .filter(|&p| group.contains(&ranking[p]) && !group.contains(&ranking[p - 1]))
            .collect();
        let Some(&p) = spots.choose(rng) else { break };
        ranking.swap(p - 1, p);
    }
    Relation::from_ranking(ranking.len(), &ranking).expect("permuted ranking")
}

/// `base`, a strict improvement `less` of it, and a strict improvement
/// `more` of `less`, all for the same group.
pub fn strict_improvement_triple<R: Rng>(
    students: usize,
    schools: usize,
    rng: &mut R,
) -> ImprovementTriple {
    let group = random_group(students, rng);
    let base: Vec<Relation> = (0..schools).map(|_| random_total(students, rng)).collect();
    let less: Vec<Relation> = base
        .iter()
        .map(|r| promote(r, &group, rng.gen_range(0..=students), rng))
        .collect();
    let more: Vec<Relation> = less
        .iter()
        .map(|r| promote(r, &group, rng.gen_range(0..=students), rng))
        .collect();
    debug_assert!(is_strict_improvement(&base, &less, &group).unwrap_or(false));
    debug_assert!(is_strict_improvement(&less, &more, &group).unwrap_or(false));
    ImprovementTriple { base, more, less, group }
}

/// An instance with the triple's base profile and random preferences.
pub fn instance_for_triple<R: Rng>(
    cfg: &GenConfig,
    triple: &ImprovementTriple,
    rng: &mut R,
) -> Result<Instance, GenError> {
    skeleton(cfg, Priorities::Single(triple.base.clone()), rng)
}
