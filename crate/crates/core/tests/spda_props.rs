mod common;

use multiprio::gen::{random_instance, PriorityKind};
use multiprio::market::{is_stable, weakly_pareto_dominates};
use multiprio::oracle::{optimal_set, stable_set, Notion};
use multiprio::spda::{run_da_with, underdemanded, underdemanded_by_definition, ProposalOrder};
use multiprio::{run_da, StudentId};

#[test]
fn proposal_order_does_not_matter() {
    for seed in 0..200 {
        let mut rng = common::rng(seed);
        let cfg = common::small_config(&mut rng, 8);
        let inst = random_instance(&cfg, PriorityKind::Total, &mut rng).unwrap();
        let profile = inst.single_profile().unwrap();
        let base = run_da(&inst).unwrap();
        for k in 0..5 {
            let other = run_da_with(&inst, profile, ProposalOrder::Seeded(seed * 31 + k)).unwrap();
            assert_eq!(other.matching, base.matching, "seed {seed}");
            assert_eq!(other.rejections, base.rejections, "seed {seed}");
        }
    }
}

#[test]
fn da_is_the_unique_student_optimal_stable_matching() {
    for seed in 0..200 {
        let mut rng = common::rng(1000 + seed);
        let cfg = common::small_config(&mut rng, 6);
        let inst = random_instance(&cfg, PriorityKind::Total, &mut rng).unwrap();
        let profile = inst.single_profile().unwrap();
        let all: Vec<StudentId> = inst.students().collect();
        let mu = run_da(&inst).unwrap().matching;
        assert!(is_stable(&mu, &inst, profile));
        let sosm = optimal_set(&inst, Notion::Stable(profile), &all).unwrap();
        assert_eq!(sosm, vec![mu.clone()], "seed {seed}");
        for nu in stable_set(&inst, Notion::Stable(profile)).unwrap() {
            assert!(weakly_pareto_dominates(&mu, &nu, &inst, &all).unwrap());
        }
    }
}

#[test]
fn rejection_free_schools_are_exactly_the_underdemanded_ones() {
    for seed in 0..300 {
        let mut rng = common::rng(5000 + seed);
        let cfg = common::small_config(&mut rng, 9);
        let inst = random_instance(&cfg, PriorityKind::Total, &mut rng).unwrap();
        let out = run_da(&inst).unwrap();
        let students: Vec<StudentId> = inst.students().collect();
        let by_def = underdemanded_by_definition(&out.matching, inst.prefs(), &students, inst.schools());
        assert_eq!(underdemanded(&out, &inst), by_def, "seed {seed}");
    }
}
