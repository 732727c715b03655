//! School choice instances, matchings, and the fairness and stability
//! predicates defined over them.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::combine::MultiProfile;
use crate::relations::{Relation, StudentId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SchoolId(pub usize);

impl SchoolId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for SchoolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "@{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MarketError {
    #[error("instance has no students")]
    NoStudents,
    #[error("instance has no schools")]
    NoSchools,
    #[error("duplicate student id {0:?}")]
    DuplicateStudent(String),
    #[error("duplicate school id {0:?}")]
    DuplicateSchool(String),
    #[error("school {0:?} has capacity 0")]
    ZeroCapacity(String),
    #[error("preferences given for {got} students, expected {expected}")]
    PreferenceCount { expected: usize, got: usize },
    #[error("student {student:?} lists school index {school} which does not exist")]
    UnknownSchool { student: String, school: usize },
    #[error("student {student:?} lists school {school:?} twice")]
    RepeatedSchool { student: String, school: String },
    #[error("priority profile has {got} entries, expected one per school ({expected})")]
    ProfileSize { expected: usize, got: usize },
    #[error("priority relation of school {school:?} is over {got} students, expected {expected}")]
    PriorityGround { school: String, expected: usize, got: usize },
    #[error("matching covers {got} students, expected {expected}")]
    MatchingSize { expected: usize, got: usize },
    #[error("school {school:?} holds {held} students but has capacity {capacity}")]
    OverCapacity { school: String, held: usize, capacity: usize },
    #[error("comparison group is empty")]
    EmptyGroup,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct School {
    pub name: String,
    pub capacity: usize,
}

/// Each student's acceptable schools, best first. The outside option sits
/// right after the last listed school; unlisted schools rank below it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Preferences {
    lists: Vec<Vec<SchoolId>>,
    // position of each school in each student's list, usize::MAX if unlisted
    pos: Vec<Vec<usize>>,
}

impl Preferences {
    pub fn new(lists: Vec<Vec<SchoolId>>, school_count: usize) -> Self {
        let pos = lists
            .iter()
            .map(|l| {
                let mut p = vec![usize::MAX; school_count];
                for (k, s) in l.iter().enumerate() {
                    if s.0 < school_count {
                        p[s.0] = k;
                    }
                }
                p
            })
            .collect();
        Preferences { lists, pos }
    }

    pub fn list(&self, i: StudentId) -> &[SchoolId] {
        &self.lists[i.0]
    }

    pub fn lists(&self) -> &[Vec<SchoolId>] {
        &self.lists
    }

    pub fn is_acceptable(&self, i: StudentId, s: SchoolId) -> bool {
        self.pos[i.0][s.0] != usize::MAX
    }

    /// Rank of an outcome for student `i`; lower is better. `None` is the
    /// outside option.
    pub fn rank(&self, i: StudentId, outcome: Option<SchoolId>) -> usize {
        let len = self.lists[i.0].len();
        match outcome {
            None => len,
            Some(s) => match self.pos[i.0][s.0] {
                usize::MAX => len + 1 + s.0,
                k => k,
            },
        }
    }

    /// Strict preference `a P_i b`.
    pub fn prefers(&self, i: StudentId, a: Option<SchoolId>, b: Option<SchoolId>) -> bool {
        self.rank(i, a) < self.rank(i, b)
    }

    /// Weak preference `a R_i b`.
    pub fn weakly_prefers(&self, i: StudentId, a: Option<SchoolId>, b: Option<SchoolId>) -> bool {
        self.rank(i, a) <= self.rank(i, b)
    }
}

/// Priorities attached to an instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Priorities {
    Single(Vec<Relation>),
    Multi(MultiProfile),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    students: Vec<String>,
    schools: Vec<School>,
    prefs: Preferences,
    priorities: Priorities,
    student_index: HashMap<String, StudentId>,
    school_index: HashMap<String, SchoolId>,
}

impl Instance {
    pub fn new(
        students: Vec<String>,
        schools: Vec<School>,
        prefs: Vec<Vec<SchoolId>>,
        priorities: Priorities,
    ) -> Result<Self, MarketError> {
        if students.is_empty() {
            return Err(MarketError::NoStudents);
        }
        if schools.is_empty() {
            return Err(MarketError::NoSchools);
        }
        let mut student_index = HashMap::new();
        for (k, name) in students.iter().enumerate() {
            if student_index.insert(name.clone(), StudentId(k)).is_some() {
                return Err(MarketError::DuplicateStudent(name.clone()));
            }
        }
        let mut school_index = HashMap::new();
        for (k, sc) in schools.iter().enumerate() {
            if school_index.insert(sc.name.clone(), SchoolId(k)).is_some() {
                return Err(MarketError::DuplicateSchool(sc.name.clone()));
            }
            if sc.capacity == 0 {
                return Err(MarketError::ZeroCapacity(sc.name.clone()));
            }
        }
        if prefs.len() != students.len() {
            return Err(MarketError::PreferenceCount {
                expected: students.len(),
                got: prefs.len(),
            });
        }
        for (k, list) in prefs.iter().enumerate() {
            let mut seen = BTreeSet::new();
            for s in list {
                if s.0 >= schools.len() {
                    return Err(MarketError::UnknownSchool {
                        student: students[k].clone(),
                        school: s.0,
                    });
                }
                if !seen.insert(*s) {
                    return Err(MarketError::RepeatedSchool {
                        student: students[k].clone(),
                        school: schools[s.0].name.clone(),
                    });
                }
            }
        }
        let inst = Instance {
            prefs: Preferences::new(prefs, schools.len()),
            students,
            schools,
            priorities,
            student_index,
            school_index,
        };
        match &inst.priorities {
            Priorities::Single(p) => inst.check_profile(p)?,
            Priorities::Multi(mp) => {
                if mp.len() != inst.schools.len() {
                    return Err(MarketError::ProfileSize {
                        expected: inst.schools.len(),
                        got: mp.len(),
                    });
                }
                for ps in mp.sets() {
                    inst.check_profile_ground(ps.school, ps.ground_size())?;
                }
            }
        }
        Ok(inst)
    }

    /// Checks that a profile has one relation per school over this
    /// instance's students.
    pub fn check_profile(&self, profile: &[Relation]) -> Result<(), MarketError> {
        if profile.len() != self.schools.len() {
            return Err(MarketError::ProfileSize {
                expected: self.schools.len(),
                got: profile.len(),
            });
        }
        for (k, r) in profile.iter().enumerate() {
            self.check_profile_ground(SchoolId(k), r.ground_size())?;
        }
        Ok(())
    }

    fn check_profile_ground(&self, s: SchoolId, got: usize) -> Result<(), MarketError> {
        if got != self.students.len() {
            return Err(MarketError::PriorityGround {
                school: self.schools[s.0].name.clone(),
                expected: self.students.len(),
                got,
            });
        }
        Ok(())
    }

    /// Same students, schools and preferences with different priorities.
    pub fn with_priorities(&self, priorities: Priorities) -> Result<Self, MarketError> {
        Instance::new(
            self.students.clone(),
            self.schools.clone(),
            self.prefs.lists().to_vec(),
            priorities,
        )
    }

    pub fn student_count(&self) -> usize {
        self.students.len()
    }

    pub fn school_count(&self) -> usize {
        self.schools.len()
    }

    pub fn students(&self) -> impl Iterator<Item = StudentId> {
        (0..self.students.len()).map(StudentId)
    }

    pub fn schools(&self) -> impl Iterator<Item = SchoolId> {
        (0..self.schools.len()).map(SchoolId)
    }

    pub fn student_names(&self) -> &[String] {
        &self.students
    }

    pub fn school_list(&self) -> &[School] {
        &self.schools
    }

    pub fn student_name(&self, i: StudentId) -> &str {
        &self.students[i.0]
    }

    pub fn school_name(&self, s: SchoolId) -> &str {
        &self.schools[s.0].name
    }

    pub fn student(&self, name: &str) -> Option<StudentId> {
        self.student_index.get(name).copied()
    }

    pub fn school(&self, name: &str) -> Option<SchoolId> {
        self.school_index.get(name).copied()
    }

    pub fn capacity(&self, s: SchoolId) -> usize {
        self.schools[s.0].capacity
    }

    pub fn prefs(&self) -> &Preferences {
        &self.prefs
    }

    pub fn priorities(&self) -> &Priorities {
        &self.priorities
    }

    /// The single profile, if the instance carries one.
    pub fn single_profile(&self) -> Option<&[Relation]> {
        match &self.priorities {
            Priorities::Single(p) => Some(p),
            Priorities::Multi(_) => None,
        }
    }

    pub fn multi_profile(&self) -> Option<&MultiProfile> {
        match &self.priorities {
            Priorities::Multi(mp) => Some(mp),
            Priorities::Single(_) => None,
        }
    }

    pub fn outcome_name(&self, s: Option<SchoolId>) -> &str {
        s.map_or("-", |s| self.school_name(s))
    }
}

/// An assignment of students to schools (or to nothing) together with the
/// inverse rosters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matching {
    assign: Vec<Option<SchoolId>>,
    rosters: Vec<BTreeSet<StudentId>>,
}

impl Matching {
    pub fn unmatched(students: usize, schools: usize) -> Self {
        Matching {
            assign: vec![None; students],
            rosters: vec![BTreeSet::new(); schools],
        }
    }

    /// Builds a matching from per-student assignments. Capacities are not
    /// checked here; see [`Matching::validate`].
    pub fn from_assignment(assign: Vec<Option<SchoolId>>, schools: usize) -> Self {
        let mut rosters = vec![BTreeSet::new(); schools];
        for (i, s) in assign.iter().enumerate() {
            if let Some(s) = s {
                rosters[s.0].insert(StudentId(i));
            }
        }
        Matching { assign, rosters }
    }

    /// Builds and validates a matching against an instance.
    pub fn new(inst: &Instance, assign: Vec<Option<SchoolId>>) -> Result<Self, MarketError> {
        if assign.len() != inst.student_count() {
            return Err(MarketError::MatchingSize {
                expected: inst.student_count(),
                got: assign.len(),
            });
        }
        if let Some(s) = assign.iter().flatten().find(|s| s.0 >= inst.school_count()) {
            return Err(MarketError::UnknownSchool {
                student: "?".into(),
                school: s.0,
            });
        }
        let m = Matching::from_assignment(assign, inst.school_count());
        m.validate(inst)?;
        Ok(m)
    }

    pub fn validate(&self, inst: &Instance) -> Result<(), MarketError> {
        if self.assign.len() != inst.student_count() {
            return Err(MarketError::MatchingSize {
                expected: inst.student_count(),
                got: self.assign.len(),
            });
        }
        for s in inst.schools() {
            let held = self.rosters[s.0].len();
            if held > inst.capacity(s) {
                return Err(MarketError::OverCapacity {
                    school: inst.school_name(s).to_string(),
                    held,
                    capacity: inst.capacity(s),
                });
            }
        }
        Ok(())
    }

    pub fn get(&self, i: StudentId) -> Option<SchoolId> {
        self.assign[i.0]
    }

    pub fn roster(&self, s: SchoolId) -> &BTreeSet<StudentId> {
        &self.rosters[s.0]
    }

    pub fn assignment(&self) -> &[Option<SchoolId>] {
        &self.assign
    }

    pub fn rosters(&self) -> &[BTreeSet<StudentId>] {
        &self.rosters
    }

    pub fn set(&mut self, i: StudentId, s: Option<SchoolId>) {
        if let Some(old) = self.assign[i.0] {
            self.rosters[old.0].remove(&i);
        }
        if let Some(new) = s {
            self.rosters[new.0].insert(i);
        }
        self.assign[i.0] = s;
    }

    /// `assign` and `rosters` describe the same matching.
    pub fn is_consistent(&self) -> bool {
        let rebuilt = Matching::from_assignment(self.assign.clone(), self.rosters.len());
        rebuilt.rosters == self.rosters
    }

    /// Compact rendering such as `i1:s2 i2:- i3:s1`.
    pub fn describe(&self, inst: &Instance) -> String {
        inst.students()
            .map(|i| format!("{}:{}", inst.student_name(i), inst.outcome_name(self.get(i))))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// A claimant `student` who prefers `school` to their assignment and has
/// priority over `incumbent` there under order `order` of the school.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ViolationWitness {
    pub student: StudentId,
    pub incumbent: StudentId,
    pub school: SchoolId,
    pub order: usize,
}

pub fn is_individually_rational(mu: &Matching, inst: &Instance) -> bool {
    inst.students().all(|i| match mu.get(i) {
        None => true,
        Some(s) => inst.prefs().is_acceptable(i, s),
    })
}

/// Student-school pairs where the student prefers a school with a free seat.
pub fn waste(mu: &Matching, inst: &Instance) -> Vec<(StudentId, SchoolId)> {
    let mut out = Vec::new();
    for i in inst.students() {
        for &s in inst.prefs().list(i) {
            if !inst.prefs().prefers(i, Some(s), mu.get(i)) {
                break;
            }
            if mu.roster(s).len() < inst.capacity(s) {
                out.push((i, s));
            }
        }
    }
    out
}

pub fn is_nonwasteful(mu: &Matching, inst: &Instance) -> bool {
    waste(mu, inst).is_empty()
}

/// Every `(i, j, s)` with `s P_i mu(i)`, `j` in `mu(s)` and `(i, j)` in
/// `relation`, tagged with `order`.
fn violations_of(
    mu: &Matching,
    inst: &Instance,
    school: SchoolId,
    relation: &Relation,
    order: usize,
    out: &mut Vec<ViolationWitness>,
) {
    for i in inst.students() {
        if !inst.prefs().prefers(i, Some(school), mu.get(i)) {
            continue;
        }
        for &j in mu.roster(school) {
            if relation.contains(i, j) {
                out.push(ViolationWitness {
                    student: i,
                    incumbent: j,
                    school,
                    order,
                });
            }
        }
    }
}

/// Priority violations under a single profile, sorted.
pub fn fairness_violations(
    mu: &Matching,
    inst: &Instance,
    profile: &[Relation],
) -> Vec<ViolationWitness> {
    let mut out = Vec::new();
    for s in inst.schools() {
        violations_of(mu, inst, s, &profile[s.0], 0, &mut out);
    }
    out.sort();
    out
}

pub fn is_fair(mu: &Matching, inst: &Instance, profile: &[Relation]) -> bool {
    fairness_violations(mu, inst, profile).is_empty()
}

pub fn is_stable(mu: &Matching, inst: &Instance, profile: &[Relation]) -> bool {
    is_individually_rational(mu, inst) && is_nonwasteful(mu, inst) && is_fair(mu, inst, profile)
}

/// Violations of some order in a school's set that no order of the set
/// excuses by ranking the incumbent above the claimant.
pub fn m_fairness_violations(
    mu: &Matching,
    inst: &Instance,
    mp: &MultiProfile,
) -> Vec<ViolationWitness> {
    let mut out = Vec::new();
    for ps in mp.sets() {
        let mut raw = Vec::new();
        for (k, order) in ps.orders().iter().enumerate() {
            violations_of(mu, inst, ps.school, order, k, &mut raw);
        }
        out.extend(raw.into_iter().filter(|w| {
            !ps.orders()
                .iter()
                .any(|o| o.contains(w.incumbent, w.student))
        }));
    }
    out.sort();
    out
}

pub fn is_m_fair(mu: &Matching, inst: &Instance, mp: &MultiProfile) -> bool {
    m_fairness_violations(mu, inst, mp).is_empty()
}

pub fn is_m_stable(mu: &Matching, inst: &Instance, mp: &MultiProfile) -> bool {
    is_individually_rational(mu, inst) && is_nonwasteful(mu, inst) && is_m_fair(mu, inst, mp)
}

/// Violations that every order of the school's set agrees on.
pub fn weak_m_fairness_violations(
    mu: &Matching,
    inst: &Instance,
    mp: &MultiProfile,
) -> Vec<ViolationWitness> {
    let mut out = Vec::new();
    for ps in mp.sets() {
        let mut raw = Vec::new();
        violations_of(mu, inst, ps.school, &ps.orders()[0], 0, &mut raw);
        out.extend(raw.into_iter().filter(|w| {
            ps.orders().iter().all(|o| o.contains(w.student, w.incumbent))
        }));
    }
    out.sort();
    out
}

pub fn is_weakly_m_fair(mu: &Matching, inst: &Instance, mp: &MultiProfile) -> bool {
    weak_m_fairness_violations(mu, inst, mp).is_empty()
}

pub fn is_weakly_m_stable(mu: &Matching, inst: &Instance, mp: &MultiProfile) -> bool {
    is_individually_rational(mu, inst) && is_nonwasteful(mu, inst) && is_weakly_m_fair(mu, inst, mp)
}

/// `better` Pareto dominates `worse` for `group`: nobody in the group is worse
/// off and somebody is strictly better off.
pub fn pareto_dominates(
    better: &Matching,
    worse: &Matching,
    inst: &Instance,
    group: &[StudentId],
) -> Result<bool, MarketError> {
    if group.is_empty() {
        return Err(MarketError::EmptyGroup);
    }
    let p = inst.prefs();
    let none_worse = group
        .iter()
        .all(|&i| p.weakly_prefers(i, better.get(i), worse.get(i)));
    let some_better = group
        .iter()
        .any(|&i| p.prefers(i, better.get(i), worse.get(i)));
    Ok(none_worse && some_better)
}

/// Pareto domination for `group`, or equality of the two matchings.
pub fn weakly_pareto_dominates(
    better: &Matching,
    worse: &Matching,
    inst: &Instance,
    group: &[StudentId],
) -> Result<bool, MarketError> {
    Ok(better == worse || pareto_dominates(better, worse, inst, group)?)
}

/// Pairs `(i, s)` that block `mu` under the common `score` order and under the
/// school's own preference order at the same time.
pub fn double_blocking_pairs(
    mu: &Matching,
    inst: &Instance,
    score: &Relation,
    pref: &[Relation],
) -> Vec<(StudentId, SchoolId)> {
    let mut out = Vec::new();
    for s in inst.schools() {
        for i in inst.students() {
            if !inst.prefs().prefers(i, Some(s), mu.get(i)) {
                continue;
            }
            let roster = mu.roster(s);
            let by_score = roster.iter().any(|&j| score.contains(i, j));
            let by_pref = roster.iter().any(|&j| pref[s.0].contains(i, j));
            if by_score && by_pref {
                out.push((i, s));
            }
        }
    }
    out.sort();
    out
}
