//! Improvements of total priority profiles for a group of students, the
//! mechanism `phi_star`, and responsiveness checks.
//!
//! A profile `cand` improves `base` for a group when every student who
//! overtakes somebody at some school belongs to the group.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::combine::MultiProfile;
use crate::eada::{run_ea_multi, EadaError, EadaTrace};
use crate::market::{pareto_dominates, Instance, Matching, MarketError, SchoolId};
use crate::relations::{Relation, StudentId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ImprovementError {
    #[error("{role} profile is not a total order at school {school}")]
    NotTotal { role: &'static str, school: SchoolId },
    #[error("{role} profile has {got} schools, expected {expected}")]
    ProfileSize { role: &'static str, expected: usize, got: usize },
    #[error("improved group is empty")]
    EmptyGroup,
    #[error("the first candidate does not more improve the base than the second: {0}")]
    PreconditionFailed(MoreImprovesFailure),
    #[error("combined priorities at school {0} are not nested although the precondition holds")]
    InclusionViolated(SchoolId),
    #[error(transparent)]
    Eada(#[from] EadaError),
    #[error(transparent)]
    Market(#[from] MarketError),
}

/// Student `gainer` overtakes `over` at `school`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Overtake {
    pub gainer: StudentId,
    pub over: StudentId,
    pub school: SchoolId,
}

/// The first condition of "more improves" that fails, with a witness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoreImprovesFailure {
    /// The more improved profile is not an improvement of the base.
    MoreNotImprovement(Overtake),
    /// The less improved profile is not an improvement of the base.
    LessNotImprovement(Overtake),
    /// The more improved profile is not an improvement of the less improved one.
    NotNested(Overtake),
    /// `gainer` overtook `over` under the less improved profile but not
    /// under the more improved one.
    NotMonotone(Overtake),
}

impl MoreImprovesFailure {
    fn parts(&self) -> (&'static str, &Overtake) {
        match self {
            MoreImprovesFailure::MoreNotImprovement(o) => ("more improved profile is not an improvement", o),
            MoreImprovesFailure::LessNotImprovement(o) => ("less improved profile is not an improvement", o),
            MoreImprovesFailure::NotNested(o) => ("more improved profile does not improve the less improved one", o),
            MoreImprovesFailure::NotMonotone(o) => ("an overtake of the less improved profile is undone", o),
        }
    }

    pub fn overtake(&self) -> Overtake {
        *self.parts().1
    }

    /// Like `Display`, with student and school names from `inst`.
    pub fn describe(&self, inst: &Instance) -> String {
        let (what, o) = self.parts();
        format!(
            "{what}: {} over {} at {}",
            inst.student_name(o.gainer),
            inst.student_name(o.over),
            inst.school_name(o.school)
        )
    }
}

impl std::fmt::Display for MoreImprovesFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let (what, o) = self.parts();
        write!(f, "{what} ({} over {} at {})", o.gainer, o.over, o.school)
    }
}

fn require_total(role: &'static str, p: &[Relation], schools: usize) -> Result<(), ImprovementError> {
    if p.len() != schools {
        return Err(ImprovementError::ProfileSize {
            role,
            expected: schools,
            got: p.len(),
        });
    }
    match p.iter().position(|r| !r.classify().is_total()) {
        Some(s) => Err(ImprovementError::NotTotal { role, school: SchoolId(s) }),
        None => Ok(()),
    }
}

fn group_mask(n: usize, group: &[StudentId]) -> Result<Vec<bool>, ImprovementError> {
    if group.is_empty() {
        return Err(ImprovementError::EmptyGroup);
    }
    let mut mask = vec![false; n];
    for i in group {
        mask[i.0] = true;
    }
    Ok(mask)
}

/// First student outside the group who overtakes somebody, if any.
fn outside_overtake(base: &[Relation], cand: &[Relation], mask: &[bool]) -> Option<Overtake> {
    for (s, (b, c)) in base.iter().zip(cand).enumerate() {
        for (j, i) in b.pairs() {
            if c.contains(i, j) && !mask[i.0] {
                return Some(Overtake { gainer: i, over: j, school: SchoolId(s) });
            }
        }
    }
    None
}

/// Student who overtakes somebody without being in the group, if any.
pub fn improvement_witness(
    base: &[Relation],
    cand: &[Relation],
    group: &[StudentId],
) -> Result<Option<Overtake>, ImprovementError> {
    require_total("base", base, base.len())?;
    require_total("candidate", cand, base.len())?;
    let n = base.first().map_or(0, Relation::ground_size);
    Ok(outside_overtake(base, cand, &group_mask(n, group)?))
}

pub fn is_improvement(
    base: &[Relation],
    cand: &[Relation],
    group: &[StudentId],
) -> Result<bool, ImprovementError> {
    Ok(improvement_witness(base, cand, group)?.is_none())
}

/// Why `more` does not more improve `base` than `less` for the group, or
/// `None` when it does.
pub fn more_improves_failure(
    base: &[Relation],
    more: &[Relation],
    less: &[Relation],
    group: &[StudentId],
) -> Result<Option<MoreImprovesFailure>, ImprovementError> {
    let m = base.len();
    require_total("base", base, m)?;
    require_total("more improved", more, m)?;
    require_total("less improved", less, m)?;
    let n = base.first().map_or(0, Relation::ground_size);
    let mask = group_mask(n, group)?;
    if let Some(o) = outside_overtake(base, more, &mask) {
        return Ok(Some(MoreImprovesFailure::MoreNotImprovement(o)));
    }
    if let Some(o) = outside_overtake(base, less, &mask) {
        return Ok(Some(MoreImprovesFailure::LessNotImprovement(o)));
    }
    if let Some(o) = outside_overtake(less, more, &mask) {
        return Ok(Some(MoreImprovesFailure::NotNested(o)));
    }
    for s in 0..m {
        for (i, i2) in base[s].pairs() {
            if less[s].contains(i2, i) && !more[s].contains(i2, i) {
                return Ok(Some(MoreImprovesFailure::NotMonotone(Overtake {
                    gainer: i2,
                    over: i,
                    school: SchoolId(s),
                })));
            }
        }
    }
    Ok(None)
}

pub fn more_improves(
    base: &[Relation],
    more: &[Relation],
    less: &[Relation],
    group: &[StudentId],
) -> Result<bool, ImprovementError> {
    Ok(more_improves_failure(base, more, less, group)?.is_none())
}

/// Group members keep every win they had, and the order among students
/// outside the group is untouched.
pub fn is_strict_improvement(
    base: &[Relation],
    cand: &[Relation],
    group: &[StudentId],
) -> Result<bool, ImprovementError> {
    require_total("base", base, base.len())?;
    require_total("candidate", cand, base.len())?;
    let n = base.first().map_or(0, Relation::ground_size);
    let mask = group_mask(n, group)?;
    Ok(base.iter().zip(cand).all(|(b, c)| {
        b.pairs().all(|(i, j)| {
            let keeps_win = !mask[i.0] || c.contains(i, j);
            let outsiders_fixed = mask[i.0] || mask[j.0] || c.contains(i, j);
            keeps_win && outsiders_fixed
        })
    }))
}

/// The two-order profile pairing each school's base order with its
/// adjusted order.
pub fn paired_profile(base: &[Relation], adjusted: &[Relation]) -> Result<MultiProfile, ImprovementError> {
    MultiProfile::from_profiles(&[base, adjusted])
        .map_err(|e| ImprovementError::Eada(EadaError::Combine(e)))
}

/// EADA on the combined profile of base and adjusted orders, with the
/// adjusted orders as extension.
pub fn phi_star(
    inst: &Instance,
    base: &[Relation],
    adjusted: &[Relation],
) -> Result<(Matching, EadaTrace), ImprovementError> {
    require_total("base", base, inst.school_count())?;
    require_total("adjusted", adjusted, inst.school_count())?;
    let mp = paired_profile(base, adjusted)?;
    Ok(run_ea_multi(inst, &mp, &vec![1; inst.school_count()])?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CheckMode {
    /// Refuse triples that fail "more improves".
    #[default]
    Enforce,
    /// Run the comparison regardless and report the failed condition.
    Diagnostic,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResponsivenessVerdict {
    /// Failed condition of "more improves", `None` when it holds.
    pub precondition: Option<MoreImprovesFailure>,
    /// `phi_star(base, more)`.
    pub outcome_more: Matching,
    /// `phi_star(base, less)`.
    pub outcome_less: Matching,
    /// Whether `outcome_less` Pareto dominates `outcome_more` for the group.
    pub dominated: bool,
    /// Per school: the combined relation for `more` is contained in the one
    /// for `less`.
    pub m_inclusion: Vec<bool>,
}

pub fn check_responsiveness(
    inst: &Instance,
    base: &[Relation],
    more: &[Relation],
    less: &[Relation],
    group: &[StudentId],
    mode: CheckMode,
) -> Result<ResponsivenessVerdict, ImprovementError> {
    let precondition = more_improves_failure(base, more, less, group)?;
    if let (Some(f), CheckMode::Enforce) = (precondition, mode) {
        return Err(ImprovementError::PreconditionFailed(f));
    }
    let m_more = paired_profile(base, more)?
        .m_profile()
        .map_err(|e| ImprovementError::Eada(EadaError::Combine(e)))?;
    let m_less = paired_profile(base, less)?
        .m_profile()
        .map_err(|e| ImprovementError::Eada(EadaError::Combine(e)))?;
    let m_inclusion: Vec<bool> = m_more
        .iter()
        .zip(&m_less)
        .map(|(a, b)| a.is_subset(b).unwrap_or(false))
        .collect();
    if precondition.is_none() {
        if let Some(s) = m_inclusion.iter().position(|ok| !ok) {
            return Err(ImprovementError::InclusionViolated(SchoolId(s)));
        }
    }
    let (outcome_more, _) = phi_star(inst, base, more)?;
    let (outcome_less, _) = phi_star(inst, base, less)?;
    let dominated = pareto_dominates(&outcome_less, &outcome_more, inst, group)?;
    Ok(ResponsivenessVerdict {
        precondition,
        outcome_more,
        outcome_less,
        dominated,
        m_inclusion,
    })
}

/// Students of `group` as a sorted set, for reporting.
pub fn group_set(group: &[StudentId]) -> BTreeSet<StudentId> {
    group.iter().copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{Priorities, School};

    fn s(i: usize) -> StudentId {
        StudentId(i)
    }

    fn rank(n: usize, order: &[usize]) -> Relation {
        Relation::from_ranking(n, &order.iter().map(|&i| s(i)).collect::<Vec<_>>()).unwrap()
    }

    // one school, six students; orders written with 1-based labels
    fn one(order: [usize; 6]) -> Vec<Relation> {
        vec![rank(6, &order.map(|k| k - 1))]
    }

    fn minority() -> Vec<StudentId> {
        (0..4).map(s).collect()
    }

    #[test]
    fn bonus_point_orders_are_improvements() {
        let p1 = one([6, 4, 2, 5, 3, 1]);
        for p in [one([2, 6, 4, 1, 5, 3]), one([2, 6, 4, 3, 1, 5]), one([2, 6, 1, 4, 5, 3])] {
            assert!(is_improvement(&p1, &p, &minority()).unwrap());
            assert!(!is_improvement(&p1, &p, &[s(0)]).unwrap());
        }
    }

    #[test]
    fn more_improves_and_its_failure() {
        let p1 = one([6, 4, 2, 5, 3, 1]);
        let p2 = one([2, 6, 4, 1, 5, 3]);
        let p3 = one([2, 6, 4, 3, 1, 5]);
        let p4 = one([2, 6, 1, 4, 5, 3]);
        assert!(more_improves(&p1, &p4, &p2, &minority()).unwrap());
        assert_eq!(
            more_improves_failure(&p1, &p3, &p2, &minority()).unwrap(),
            Some(MoreImprovesFailure::NotMonotone(Overtake {
                gainer: s(0),
                over: s(2),
                school: SchoolId(0)
            }))
        );
        assert!(more_improves(&p1, &p1, &p1, &minority()).unwrap());
    }

    #[test]
    fn strict_improvement() {
        let p1 = one([6, 4, 2, 5, 3, 1]);
        assert!(!is_strict_improvement(&p1, &one([2, 6, 4, 1, 5, 3]), &minority()).unwrap());
        assert!(!is_strict_improvement(&p1, &one([2, 6, 1, 4, 5, 3]), &minority()).unwrap());
        assert!(is_strict_improvement(&p1, &p1, &minority()).unwrap());
        let abc = vec![rank(3, &[0, 1, 2])];
        let acb = vec![rank(3, &[0, 2, 1])];
        assert!(!is_strict_improvement(&abc, &acb, &[s(0)]).unwrap());
    }

    #[test]
    fn non_total_profiles_are_refused() {
        let partial = vec![Relation::empty(3)];
        let total = vec![rank(3, &[0, 1, 2])];
        assert_eq!(
            is_improvement(&total, &partial, &[s(0)]),
            Err(ImprovementError::NotTotal { role: "candidate", school: SchoolId(0) })
        );
        assert_eq!(is_improvement(&total, &total, &[]), Err(ImprovementError::EmptyGroup));
    }

    fn three_school_instance(base: Vec<Relation>) -> Instance {
        Instance::new(
            vec!["i1".into(), "i2".into(), "i3".into()],
            (1..=3).map(|k| School { name: format!("s{k}"), capacity: 1 }).collect(),
            vec![
                vec![SchoolId(1), SchoolId(0), SchoolId(2)],
                vec![SchoolId(1), SchoolId(2), SchoolId(0)],
                vec![SchoolId(2), SchoolId(1), SchoolId(0)],
            ],
            Priorities::Single(base),
        )
        .unwrap()
    }

    #[test]
    fn non_monotone_triple_in_diagnostic_mode() {
        let base = vec![rank(3, &[0, 2, 1]), rank(3, &[2, 0, 1]), rank(3, &[1, 2, 0])];
        let more = vec![rank(3, &[0, 1, 2]), rank(3, &[2, 0, 1]), rank(3, &[1, 0, 2])];
        let less = vec![rank(3, &[0, 2, 1]), rank(3, &[2, 1, 0]), rank(3, &[1, 0, 2])];
        let inst = three_school_instance(base.clone());
        let group = [s(0), s(1)];
        assert!(is_improvement(&base, &more, &group).unwrap());
        assert!(is_improvement(&base, &less, &group).unwrap());
        assert!(is_improvement(&less, &more, &group).unwrap());
        assert!(matches!(
            check_responsiveness(&inst, &base, &more, &less, &group, CheckMode::Enforce),
            Err(ImprovementError::PreconditionFailed(MoreImprovesFailure::NotMonotone(_)))
        ));
        let v = check_responsiveness(&inst, &base, &more, &less, &group, CheckMode::Diagnostic).unwrap();
        let a = |v: &[usize]| v.iter().map(|&k| Some(SchoolId(k))).collect::<Vec<_>>();
        assert_eq!(v.outcome_more.assignment(), &a(&[0, 2, 1])[..]);
        assert_eq!(v.outcome_less.assignment(), &a(&[0, 1, 2])[..]);
        assert!(v.dominated);
    }

    #[test]
    fn identical_candidates_are_never_dominated() {
        let base = vec![rank(3, &[0, 2, 1]), rank(3, &[2, 0, 1]), rank(3, &[1, 2, 0])];
        let cand = vec![rank(3, &[0, 1, 2]), rank(3, &[2, 0, 1]), rank(3, &[1, 0, 2])];
        let inst = three_school_instance(base.clone());
        let v = check_responsiveness(&inst, &base, &cand, &cand, &[s(0), s(1)], CheckMode::Enforce).unwrap();
        assert!(!v.dominated);
        assert_eq!(v.outcome_more, v.outcome_less);
        assert!(v.m_inclusion.iter().all(|&x| x));
    }
}
