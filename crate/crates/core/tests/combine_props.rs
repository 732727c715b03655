mod common;

use multiprio::combine::{check_total_intersection, is_member_extension, m_combine, w_combine};
use multiprio::gen::{random_partial, random_total, random_weak};
use multiprio::{PrioritySet, Relation, SchoolId, StudentId};
use proptest::prelude::*;
use rand::Rng;

fn set_of(orders: Vec<Relation>) -> PrioritySet {
    PrioritySet::new(SchoolId(0), orders).unwrap()
}

fn random_set(seed: u64, make: fn(usize, &mut rand_chacha::ChaCha8Rng) -> Relation) -> PrioritySet {
    let mut rng = common::rng(seed);
    let n = rng.gen_range(1..=7);
    let k = rng.gen_range(1..=4);
    set_of((0..k).map(|_| make(n, &mut rng)).collect())
}

fn permutations(n: usize) -> Vec<Relation> {
    fn go(prefix: &mut Vec<StudentId>, rest: &mut Vec<StudentId>, out: &mut Vec<Vec<StudentId>>) {
        if rest.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for k in 0..rest.len() {
            let x = rest.remove(k);
            prefix.push(x);
            go(prefix, rest, out);
            prefix.pop();
            rest.insert(k, x);
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut (0..n).map(StudentId).collect(), &mut out);
    out.iter().map(|p| Relation::from_ranking(n, p).unwrap()).collect()
}

proptest! {
    #[test]
    fn weak_orders_combine_transitively(seed in any::<u64>()) {
        let ps = random_set(seed, random_weak);
        let m = m_combine(&ps).unwrap();
        prop_assert!(m.classify().transitive, "{:?}", ps);
    }

    #[test]
    fn partial_orders_intersect_transitively(seed in any::<u64>()) {
        let ps = random_set(seed, random_partial);
        prop_assert!(w_combine(&ps).unwrap().classify().transitive);
    }

    #[test]
    fn total_members_contain_the_combination(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let n = rng.gen_range(1..=6);
        let mut orders: Vec<Relation> = (0..rng.gen_range(0..=3)).map(|_| random_weak(n, &mut rng)).collect();
        let at = rng.gen_range(0..=orders.len());
        orders.insert(at, random_total(n, &mut rng));
        let ps = set_of(orders);
        let m = m_combine(&ps).unwrap();
        for o in ps.orders().iter().filter(|o| o.classify().is_total()) {
            prop_assert!(m.is_subset(o).unwrap());
            prop_assert!(is_member_extension(&ps, o).unwrap());
        }
    }

    #[test]
    fn combinations_are_asymmetric_and_nested(seed in any::<u64>()) {
        let ps = random_set(seed, random_partial);
        let m = m_combine(&ps).unwrap();
        let w = w_combine(&ps).unwrap();
        prop_assert!(m.is_asymmetric());
        prop_assert!(w.is_subset(&m).unwrap());
        for o in ps.orders() {
            prop_assert!(w.is_subset(o).unwrap());
        }
    }
}

#[test]
fn total_pairs_combine_to_their_intersection_exhaustively() {
    for n in 1..=5 {
        let all = permutations(n);
        for a in &all {
            for b in &all {
                let ps = set_of(vec![a.clone(), b.clone()]);
                assert!(check_total_intersection(&ps).unwrap());
                assert_eq!(m_combine(&ps).unwrap(), a.intersection(b).unwrap());
            }
        }
    }
}

#[test]
fn total_triples_combine_to_their_intersection_exhaustively() {
    let all = permutations(4);
    for a in &all {
        for b in &all {
            for c in &all {
                let ps = set_of(vec![a.clone(), b.clone(), c.clone()]);
                assert!(check_total_intersection(&ps).unwrap());
            }
        }
    }
}
