//! Worked examples stored under `fixtures/`.

use std::path::PathBuf;

use multiprio::combine::{check_total_intersection, m_combine, w_combine, PrioritySet};
use multiprio::format::{parse_instance, parse_matching, parse_profile};
use multiprio::improvements::{
    check_responsiveness, is_improvement, more_improves, more_improves_failure, paired_profile,
    CheckMode, MoreImprovesFailure, Overtake,
};
use multiprio::market::{double_blocking_pairs, fairness_violations, is_m_stable, is_stable};
use multiprio::oracle::{optimal_set, stable_set, Notion};
use multiprio::{
    phi_star, run_ea_multi, run_eada, ExtensionProfile, Instance, Matching, Priorities, Relation,
    SchoolId, StudentId, ViolationWitness,
};

fn read(path: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(path);
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn instance(path: &str) -> Instance {
    parse_instance(&read(path)).unwrap()
}

fn matching(inst: &Instance, path: &str) -> Matching {
    parse_matching(inst, &read(path)).unwrap()
}

fn profile(inst: &Instance, path: &str) -> Vec<Relation> {
    parse_profile(inst, &read(path)).unwrap()
}

fn s(i: usize) -> StudentId {
    StudentId(i)
}

fn pairs(n: usize, p: &[(usize, usize)]) -> Relation {
    Relation::from_pairs(n, p.iter().map(|&(a, b)| (s(a), s(b)))).unwrap()
}

fn everyone(inst: &Instance) -> Vec<StudentId> {
    inst.students().collect()
}

#[test]
fn sibling_and_walk_zone_orders() {
    let inst = instance("sibling-walk/instance.json");
    let mp = inst.multi_profile().unwrap();
    let m = m_combine(mp.get(SchoolId(0))).unwrap();
    assert_eq!(m, pairs(4, &[(0, 1), (0, 2), (0, 3), (1, 3), (2, 3)]));
    assert_eq!(w_combine(mp.get(SchoolId(0))).unwrap(), pairs(4, &[(0, 3)]));
    let mu = matching(&inst, "sibling-walk/mu.json");
    let mu2 = matching(&inst, "sibling-walk/mu-prime.json");
    assert!(is_m_stable(&mu, &inst, mp));
    assert!(is_m_stable(&mu2, &inst, mp));
    let ext = profile(&inst, "sibling-walk/extension.json");
    assert!(m.is_subset(&ext[0]).unwrap());
}

#[test]
fn intransitive_and_cyclic_combinations() {
    let inst = instance("cycles/pair.json");
    let m = m_combine(inst.multi_profile().unwrap().get(SchoolId(0))).unwrap();
    assert_eq!(m, pairs(3, &[(0, 1), (1, 2)]));
    assert!(!m.is_transitive());
    assert!(m.is_acyclic());

    let inst = instance("cycles/cyclic.json");
    let mp = inst.multi_profile().unwrap();
    assert!(!m_combine(mp.get(SchoolId(0))).unwrap().is_acyclic());
    assert!(stable_set(&inst, Notion::MStable(mp)).unwrap().is_empty());
}

#[test]
fn exam_bonus_profiles() {
    let inst = instance("exam-bonus/instance.json");
    let base = inst.single_profile().unwrap().to_vec();
    let p2 = profile(&inst, "exam-bonus/p2.json");
    let p3 = profile(&inst, "exam-bonus/p3.json");
    let p4 = profile(&inst, "exam-bonus/p4.json");
    let group: Vec<StudentId> = (0..4).map(s).collect();
    for p in [&p2, &p3, &p4] {
        assert!(is_improvement(&base, p, &group).unwrap());
    }
    assert!(more_improves(&base, &p4, &p2, &group).unwrap());
    assert_eq!(
        more_improves_failure(&base, &p3, &p2, &group).unwrap(),
        Some(MoreImprovesFailure::NotMonotone(Overtake { gainer: s(0), over: s(2), school: SchoolId(0) }))
    );
    let ps = PrioritySet::new(SchoolId(0), vec![base[0].clone(), p2[0].clone()]).unwrap();
    assert!(check_total_intersection(&ps).unwrap());

    let v = check_responsiveness(&inst, &base, &p4, &p2, &group, CheckMode::Enforce).unwrap();
    assert!(!v.dominated);
    let paired = inst
        .with_priorities(Priorities::Multi(paired_profile(&base, &p4).unwrap()))
        .unwrap();
    let best = optimal_set(&paired, Notion::MStable(paired.multi_profile().unwrap()), &group).unwrap();
    assert!(best.contains(&v.outcome_more));
}

#[test]
fn intransitive_priority_run() {
    let inst = instance("intransitive/instance.json");
    let base = inst.single_profile().unwrap();
    assert!(!base[0].is_transitive());
    let ext = ExtensionProfile::new(base, profile(&inst, "intransitive/extension.json")).unwrap();
    let (mu, trace) = run_eada(&inst, base, &ext).unwrap();
    assert_eq!(mu, matching(&inst, "intransitive/mu-star.json"));
    assert!(trace.is_flagged());
    assert_eq!(trace.round(1).eliminated, [s(4)].into());
    assert_eq!(
        fairness_violations(&mu, &inst, base),
        vec![ViolationWitness { student: s(2), incumbent: s(1), school: SchoolId(0), order: 0 }]
    );
    // The extension itself is violated as well: i5 wants s1 and outranks i2.
    assert!(!is_stable(&mu, &inst, ext.orders()));
    assert!(fairness_violations(&mu, &inst, ext.orders())
        .iter()
        .any(|w| w.student == s(4) && w.incumbent == s(1)));
}

#[test]
fn strict_improvements_that_are_not_nested() {
    let inst = instance("strict-improvement/instance.json");
    let base = inst.single_profile().unwrap().to_vec();
    let prime = profile(&inst, "strict-improvement/prime.json");
    let double = profile(&inst, "strict-improvement/double.json");
    let mu = matching(&inst, "strict-improvement/mu.json");
    let mu2 = matching(&inst, "strict-improvement/mu-prime.json");
    assert_eq!(phi_star(&inst, &base, &prime).unwrap().0, mu);
    assert_eq!(phi_star(&inst, &base, &double).unwrap().0, mu2);
    for (adj, expected) in [(&prime, &mu), (&double, &mu2)] {
        let paired = inst
            .with_priorities(Priorities::Multi(paired_profile(&base, adj).unwrap()))
            .unwrap();
        let mp = paired.multi_profile().unwrap();
        let somsm = optimal_set(&paired, Notion::MStable(mp), &everyone(&inst)).unwrap();
        assert_eq!(somsm, vec![expected.clone()]);
    }
    let group = [s(0), s(1)];
    let v = check_responsiveness(&inst, &base, &prime, &double, &group, CheckMode::Diagnostic).unwrap();
    assert_eq!(
        v.precondition,
        Some(MoreImprovesFailure::NotMonotone(Overtake { gainer: s(1), over: s(0), school: SchoolId(1) }))
    );
    assert!(v.dominated);
}

#[test]
fn weak_order_inputs_break_responsiveness() {
    let group = [s(0), s(1)];
    let prime = instance("weak-orders/prime.json");
    let mp = prime.multi_profile().unwrap();
    let (mu1, _) = run_ea_multi(&prime, mp, &[1, 1, 1]).unwrap();
    assert_eq!(mu1, matching(&prime, "weak-orders/mu-prime.json"));
    let somsm = optimal_set(&prime, Notion::MStable(mp), &everyone(&prime)).unwrap();
    assert_eq!(somsm, vec![mu1.clone()]);

    let double = instance("weak-orders/double.json");
    let mp2 = double.multi_profile().unwrap();
    assert_eq!(mp2.get(SchoolId(1)).first_total(), None);
    let m = mp2.m_profile().unwrap();
    let (mu2, _) = run_eada(&double, &m, &ExtensionProfile::canonical(&m).unwrap()).unwrap();
    assert_eq!(mu2, matching(&double, "weak-orders/mu-double.json"));
    let somsm = optimal_set(&double, Notion::MStable(mp2), &everyone(&double)).unwrap();
    assert!(somsm.contains(&mu2));
    assert!(multiprio::market::pareto_dominates(&mu2, &mu1, &prime, &group).unwrap());
}

#[test]
fn m_stable_matching_with_double_blocking_pair() {
    let inst = instance("double-blocking/instance.json");
    let mp = inst.multi_profile().unwrap();
    let mu = matching(&inst, "double-blocking/mu.json");
    assert!(is_m_stable(&mu, &inst, mp));
    let orders = mp.get(SchoolId(0)).orders();
    assert_eq!(
        double_blocking_pairs(&mu, &inst, &orders[0], &orders[1..]),
        vec![(s(0), SchoolId(0))]
    );
    let score = fairness_violations(&mu, &inst, &orders[..1]);
    let pref = fairness_violations(&mu, &inst, &orders[1..]);
    assert_eq!(score.iter().map(|w| w.incumbent).collect::<Vec<_>>(), vec![s(2)]);
    assert_eq!(pref.iter().map(|w| w.incumbent).collect::<Vec<_>>(), vec![s(1)]);
}
