use multiprio::relations::{OrderKind, Relation, StudentId};
use proptest::prelude::*;

fn build(n: usize, bits: &[bool]) -> Relation {
    let pairs = (0..n)
        .flat_map(|a| (0..n).map(move |b| (a, b)))
        .filter(|&(a, b)| a != b && bits[a * n + b])
        .map(|(a, b)| (StudentId(a), StudentId(b)));
    Relation::from_pairs(n, pairs).unwrap()
}

fn any_relation(max: usize) -> impl Strategy<Value = Relation> {
    (1..=max).prop_flat_map(|n| {
        proptest::collection::vec(any::<bool>(), n * n).prop_map(move |bits| build(n, &bits))
    })
}

/// Random DAG: forward edges along a shuffled order.
fn any_dag(max: usize) -> impl Strategy<Value = Relation> {
    (1..=max).prop_flat_map(|n| {
        (
            Just((0..n).collect::<Vec<usize>>()).prop_shuffle(),
            proptest::collection::vec(any::<bool>(), n * n),
        )
            .prop_map(move |(perm, bits)| {
                let pairs = (0..n)
                    .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
                    .filter(|&(a, b)| bits[a * n + b])
                    .map(|(a, b)| (StudentId(perm[a]), StudentId(perm[b])));
                Relation::from_pairs(n, pairs).unwrap()
            })
    })
}

struct Naive<'a>(&'a Relation);

impl Naive<'_> {
    fn n(&self) -> usize {
        self.0.ground_size()
    }
    fn has(&self, a: usize, b: usize) -> bool {
        self.0.contains(StudentId(a), StudentId(b))
    }
    fn asymmetric(&self) -> bool {
        (0..self.n()).all(|a| (0..self.n()).all(|b| !(self.has(a, b) && self.has(b, a))))
    }
    fn complete(&self) -> bool {
        (0..self.n()).all(|a| (0..self.n()).all(|b| a == b || self.has(a, b) || self.has(b, a)))
    }
    fn transitive(&self) -> bool {
        let n = self.n();
        (0..n).all(|a| {
            (0..n).all(|b| (0..n).all(|c| !(self.has(a, b) && self.has(b, c)) || self.has(a, c)))
        })
    }
    fn negatively_transitive(&self) -> bool {
        let n = self.n();
        (0..n).all(|a| {
            (0..n).all(|b| {
                (0..n).all(|c| self.has(a, b) || self.has(b, c) || !self.has(a, c))
            })
        })
    }
    /// No chain x0 > x1 > ... > xK of two or more strict steps with
    /// (xK, x0) in the relation, searched over every simple path.
    fn acyclic(&self) -> bool {
        let n = self.n();
        fn walk(r: &Naive<'_>, start: usize, at: usize, len: usize, seen: &mut Vec<bool>) -> bool {
            if len >= 2 && r.has(at, start) {
                return false;
            }
            for next in 0..r.n() {
                if !seen[next] && r.has(at, next) && !r.has(next, at) {
                    seen[next] = true;
                    let ok = walk(r, start, next, len + 1, seen);
                    seen[next] = false;
                    if !ok {
                        return false;
                    }
                }
            }
            true
        }
        (0..n).all(|s| {
            let mut seen = vec![false; n];
            seen[s] = true;
            walk(self, s, s, 0, &mut seen)
        })
    }
}

/// Cycle detection on the digraph of the asymmetric part.
fn has_cycle(r: &Relation) -> bool {
    let p = r.asymmetric_part();
    let n = p.ground_size();
    let mut reach = vec![vec![false; n]; n];
    for (a, b) in p.pairs() {
        reach[a.0][b.0] = true;
    }
    for k in 0..n {
        for a in 0..n {
            for b in 0..n {
                if reach[a][k] && reach[k][b] {
                    reach[a][b] = true;
                }
            }
        }
    }
    (0..n).any(|a| reach[a][a])
}

proptest! {
    #[test]
    fn classify_matches_naive_definitions(r in any_relation(5)) {
        let c = r.classify();
        let naive = Naive(&r);
        prop_assert_eq!(c.asymmetric, naive.asymmetric());
        prop_assert_eq!(c.complete, naive.complete());
        prop_assert_eq!(c.transitive, naive.transitive());
        prop_assert_eq!(c.negatively_transitive, naive.negatively_transitive());
        prop_assert_eq!(c.acyclic, naive.acyclic());
        let partial = naive.asymmetric() && naive.transitive();
        let weak = partial && naive.negatively_transitive();
        let total = weak && naive.complete();
        let expected = if total {
            OrderKind::Total
        } else if weak {
            OrderKind::Weak
        } else if partial {
            OrderKind::Partial
        } else {
            OrderKind::General
        };
        prop_assert_eq!(c.kind, expected);
    }

    #[test]
    fn class_hierarchy(r in any_relation(6)) {
        let c = r.classify();
        if c.is_total() { prop_assert!(c.is_weak()); }
        if c.is_weak() { prop_assert!(c.is_partial()); }
        if c.is_partial() { prop_assert!(c.asymmetric && c.transitive); }
        if c.transitive && c.asymmetric { prop_assert!(c.acyclic); }
    }

    #[test]
    fn asymmetric_part_is_idempotent(r in any_relation(6)) {
        let p = r.asymmetric_part();
        prop_assert!(p.classify().asymmetric);
        prop_assert_eq!(p.asymmetric_part(), p.clone());
        prop_assert!(p.is_subset(&r).unwrap());
    }

    #[test]
    fn extension_is_total_and_contains(r in any_dag(8)) {
        let e = r.extend().unwrap();
        prop_assert!(e.classify().is_total());
        prop_assert!(r.is_subset(&e).unwrap());
        prop_assert_eq!(r.extend().unwrap(), e);
    }

    #[test]
    fn asymmetric_relations_chain_acyclic_iff_no_cycle(r in any_relation(6)) {
        let p = r.asymmetric_part();
        prop_assert_eq!(p.is_acyclic(), !has_cycle(&p));
    }
}

#[test]
fn chain_definition_equals_cycle_detection_on_asymmetric_relations_exhaustively() {
    for n in 1..=4 {
        let slots: Vec<(usize, usize)> = (0..n)
            .flat_map(|a| (0..n).map(move |b| (a, b)))
            .filter(|&(a, b)| a != b)
            .collect();
        for mask in 0u32..(1 << slots.len()) {
            let r = Relation::from_pairs(
                n,
                slots
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| mask >> k & 1 == 1)
                    .map(|(_, &(a, b))| (StudentId(a), StudentId(b))),
            )
            .unwrap();
            assert_eq!(r.is_acyclic(), Naive(&r).acyclic(), "{r:?}");
            if r.is_asymmetric() {
                assert_eq!(r.is_acyclic(), !has_cycle(&r), "{r:?}");
            }
        }
    }
}

#[test]
fn symmetric_closing_pair_breaks_acyclicity_but_not_cycle_detection() {
    let s = StudentId;
    let r = Relation::from_pairs(3, [(s(0), s(1)), (s(1), s(2)), (s(2), s(0)), (s(0), s(2))]).unwrap();
    assert!(!r.is_acyclic());
    assert!(!has_cycle(&r));
    let two_way = Relation::from_pairs(2, [(s(0), s(1)), (s(1), s(0))]).unwrap();
    assert!(two_way.is_acyclic());
}
