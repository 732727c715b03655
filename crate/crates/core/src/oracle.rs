//! Exhaustive enumeration of matchings on small instances, used as ground
//! truth for the algorithms.

use thiserror::Error;

use crate::combine::MultiProfile;
use crate::market::{
    is_m_stable, is_nonwasteful, is_individually_rational, is_stable, is_weakly_m_stable,
    pareto_dominates, Instance, Matching, MarketError, SchoolId,
};
use crate::relations::{Relation, StudentId};

/// Largest number of students the oracle accepts.
pub const MAX_STUDENTS: usize = 9;
/// Largest product of per-student choice counts the oracle accepts.
pub const MAX_COMBINATIONS: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("instance too large for enumeration: {students} students, {combinations} raw assignments")]
    TooLarge { students: usize, combinations: u128 },
    #[error(transparent)]
    Market(#[from] MarketError),
}

/// Every capacity-feasible assignment of students to acceptable schools or
/// to nothing. Student 0 varies slowest; each student tries the outside
/// option first, then their schools in preference order.
pub fn enumerate_matchings(inst: &Instance) -> Result<Matchings<'_>, OracleError> {
    let n = inst.student_count();
    let combinations = inst
        .students()
        .map(|i| inst.prefs().list(i).len() as u128 + 1)
        .fold(1u128, |acc, c| acc.saturating_mul(c));
    if n > MAX_STUDENTS || combinations > MAX_COMBINATIONS {
        return Err(OracleError::TooLarge { students: n, combinations });
    }
    let choices = inst
        .students()
        .map(|i| {
            std::iter::once(None)
                .chain(inst.prefs().list(i).iter().map(|&s| Some(s)))
                .collect()
        })
        .collect();
    Ok(Matchings {
        inst,
        choices,
        next: vec![0; n],
        current: vec![None; n],
        load: vec![0; inst.school_count()],
        depth: 0,
        done: false,
    })
}

pub struct Matchings<'a> {
    inst: &'a Instance,
    choices: Vec<Vec<Option<SchoolId>>>,
    next: Vec<usize>,
    current: Vec<Option<SchoolId>>,
    load: Vec<usize>,
    depth: usize,
    done: bool,
}

impl Matchings<'_> {
    fn pop(&mut self) {
        if self.depth == 0 {
            self.done = true;
            return;
        }
        self.depth -= 1;
        if let Some(s) = self.current[self.depth].take() {
            self.load[s.0] -= 1;
        }
    }
}

impl Iterator for Matchings<'_> {
    type Item = Matching;

    fn next(&mut self) -> Option<Matching> {
        let n = self.choices.len();
        loop {
            if self.done {
                return None;
            }
            if self.depth == n {
                let m = Matching::from_assignment(self.current.clone(), self.inst.school_count());
                self.pop();
                return Some(m);
            }
            let d = self.depth;
            let mut placed = false;
            while self.next[d] < self.choices[d].len() {
                let c = self.choices[d][self.next[d]];
                self.next[d] += 1;
                if let Some(s) = c {
                    if self.load[s.0] == self.inst.capacity(s) {
                        continue;
                    }
                    self.load[s.0] += 1;
                }
                self.current[d] = c;
                self.depth += 1;
                placed = true;
                break;
            }
            if !placed {
                self.next[d] = 0;
                self.pop();
            }
        }
    }
}

/// Stability notion used to filter enumerated matchings.
#[derive(Debug, Clone, Copy)]
pub enum Notion<'a> {
    Stable(&'a [Relation]),
    MStable(&'a MultiProfile),
    WeaklyMStable(&'a MultiProfile),
}

impl Notion<'_> {
    pub fn holds(&self, mu: &Matching, inst: &Instance) -> bool {
        match self {
            Notion::Stable(p) => is_stable(mu, inst, p),
            Notion::MStable(mp) => is_m_stable(mu, inst, mp),
            Notion::WeaklyMStable(mp) => is_weakly_m_stable(mu, inst, mp),
        }
    }
}

/// All matchings satisfying `notion`, in enumeration order.
pub fn stable_set(inst: &Instance, notion: Notion<'_>) -> Result<Vec<Matching>, OracleError> {
    Ok(enumerate_matchings(inst)?
        .filter(|mu| is_individually_rational(mu, inst) && is_nonwasteful(mu, inst))
        .filter(|mu| notion.holds(mu, inst))
        .collect())
}

/// Members of `set` not Pareto dominated for `group` by another member.
pub fn undominated(
    set: &[Matching],
    inst: &Instance,
    group: &[StudentId],
) -> Result<Vec<Matching>, OracleError> {
    let mut out = Vec::new();
    for mu in set {
        let mut dominated = false;
        for nu in set {
            if pareto_dominates(nu, mu, inst, group)? {
                dominated = true;
                break;
            }
        }
        if !dominated {
            out.push(mu.clone());
        }
    }
    Ok(out)
}

/// Matchings satisfying `notion` that no other such matching Pareto
/// dominates for `group`.
pub fn optimal_set(
    inst: &Instance,
    notion: Notion<'_>,
    group: &[StudentId],
) -> Result<Vec<Matching>, OracleError> {
    undominated(&stable_set(inst, notion)?, inst, group)
}

/// Everything the oracle can say about an instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleReport {
    pub feasible: usize,
    pub ir_nonwasteful: usize,
    /// Stable matchings for the single profile, when the instance has one.
    pub stable: Option<Vec<Matching>>,
    pub sosm: Option<Vec<Matching>>,
    pub m_stable: Option<Vec<Matching>>,
    pub weakly_m_stable: Option<Vec<Matching>>,
    pub somsm: Option<Vec<Matching>>,
    /// Members of the stable (single profile) or M-stable set that are not
    /// dominated for the requested group, when a group was given.
    pub group_optimal: Option<Vec<Matching>>,
}

pub fn report(inst: &Instance, group: Option<&[StudentId]>) -> Result<OracleReport, OracleError> {
    let all: Vec<StudentId> = inst.students().collect();
    let mut feasible = 0;
    let mut base = Vec::new();
    for mu in enumerate_matchings(inst)? {
        feasible += 1;
        if is_individually_rational(&mu, inst) && is_nonwasteful(&mu, inst) {
            base.push(mu);
        }
    }
    let filter = |notion: Notion<'_>| -> Vec<Matching> {
        base.iter().filter(|mu| notion.holds(mu, inst)).cloned().collect()
    };
    let mut rep = OracleReport {
        feasible,
        ir_nonwasteful: base.len(),
        stable: None,
        sosm: None,
        m_stable: None,
        weakly_m_stable: None,
        somsm: None,
        group_optimal: None,
    };
    if let Some(p) = inst.single_profile() {
        let stable = filter(Notion::Stable(p));
        rep.sosm = Some(undominated(&stable, inst, &all)?);
        if let Some(g) = group {
            rep.group_optimal = Some(undominated(&stable, inst, g)?);
        }
        rep.stable = Some(stable);
    }
    if let Some(mp) = inst.multi_profile() {
        let m_stable = filter(Notion::MStable(mp));
        rep.somsm = Some(undominated(&m_stable, inst, &all)?);
        if let Some(g) = group {
            rep.group_optimal = Some(undominated(&m_stable, inst, g)?);
        }
        rep.m_stable = Some(m_stable);
        rep.weakly_m_stable = Some(filter(Notion::WeaklyMStable(mp)));
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combine::PrioritySet;
    use crate::market::{Priorities, School};

    fn s(i: usize) -> StudentId {
        StudentId(i)
    }

    fn rel(n: usize, pairs: &[(usize, usize)]) -> Relation {
        Relation::from_pairs(n, pairs.iter().map(|&(a, b)| (s(a), s(b)))).unwrap()
    }

    fn one_school(n: usize, cap: usize, priorities: Priorities) -> Instance {
        Instance::new(
            (1..=n).map(|k| format!("i{k}")).collect(),
            vec![School { name: "s".into(), capacity: cap }],
            vec![vec![SchoolId(0)]; n],
            priorities,
        )
        .unwrap()
    }

    #[test]
    fn counts() {
        let inst = one_school(1, 1, Priorities::Single(vec![Relation::empty(1)]));
        assert_eq!(enumerate_matchings(&inst).unwrap().count(), 2);
        let inst = one_school(4, 2, Priorities::Single(vec![Relation::empty(4)]));
        assert_eq!(enumerate_matchings(&inst).unwrap().count(), 11);
    }

    #[test]
    fn enumeration_is_duplicate_free_and_ordered() {
        let inst = Instance::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![
                School { name: "x".into(), capacity: 1 },
                School { name: "y".into(), capacity: 2 },
            ],
            vec![vec![SchoolId(0), SchoolId(1)], vec![SchoolId(1)], vec![SchoolId(1), SchoolId(0)]],
            Priorities::Single(vec![Relation::empty(3), Relation::empty(3)]),
        )
        .unwrap();
        let all: Vec<_> = enumerate_matchings(&inst).unwrap().collect();
        let mut seen = std::collections::BTreeSet::new();
        for m in &all {
            assert!(m.validate(&inst).is_ok());
            assert!(seen.insert(m.assignment().to_vec()));
        }
        // 18 raw combinations, two put a and c both at x, one puts everyone at y
        assert_eq!(all.len(), 15);
        assert!(all[0].assignment().iter().all(Option::is_none));
    }

    #[test]
    fn cyclic_set_has_no_m_stable_matching() {
        let ps = PrioritySet::new(
            SchoolId(0),
            vec![rel(3, &[(2, 0)]), rel(3, &[(0, 1)]), rel(3, &[(1, 2)])],
        )
        .unwrap();
        let mp = MultiProfile::new(vec![ps]);
        let inst = one_school(3, 1, Priorities::Multi(mp.clone()));
        assert!(stable_set(&inst, Notion::MStable(&mp)).unwrap().is_empty());
        let rep = report(&inst, None).unwrap();
        assert_eq!(rep.m_stable, Some(vec![]));
        assert_eq!(rep.somsm, Some(vec![]));
    }

    #[test]
    fn size_cap() {
        let inst = one_school(10, 1, Priorities::Single(vec![Relation::empty(10)]));
        assert!(matches!(enumerate_matchings(&inst), Err(OracleError::TooLarge { students: 10, .. })));
    }

    #[test]
    fn empty_lists_only_allow_unmatched() {
        let inst = Instance::new(
            vec!["a".into()],
            vec![School { name: "x".into(), capacity: 1 }],
            vec![vec![]],
            Priorities::Single(vec![Relation::empty(1)]),
        )
        .unwrap();
        let all: Vec<_> = enumerate_matchings(&inst).unwrap().collect();
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].get(s(0)), None);
    }
}
