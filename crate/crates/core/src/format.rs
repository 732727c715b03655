//! JSON documents for instances, priority profiles and matchings.
//!
//! An instance document looks like
//!
//! ```json
//! {
//!   "students": ["i1", "i2"],
//!   "schools": [{"id": "s", "capacity": 1}],
//!   "preferences": {"i1": ["s"], "i2": ["s"]},
//!   "priorities": {"s": [{"tiers": [["i1"], ["i2"]]}]}
//! }
//! ```
//!
//! Each school lists one or more relations, written either as `pairs`
//! (`[higher, lower]`) or as `tiers` (earlier tiers beat later ones,
//! students within a tier or left out are incomparable). When every school
//! lists exactly one relation the instance has a single profile.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::combine::{CombineError, MultiProfile, PrioritySet};
use crate::market::{Instance, Matching, MarketError, Priorities, School, SchoolId};
use crate::relations::{Relation, RelationError, StudentId};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown student {0:?}")]
    UnknownStudent(String),
    #[error("unknown school {0:?}")]
    UnknownSchool(String),
    #[error("no preferences given for student {0:?}")]
    MissingPreferences(String),
    #[error("no priorities given for school {0:?}")]
    MissingPriorities(String),
    #[error("no assignment given for student {0:?}")]
    MissingAssignment(String),
    #[error(transparent)]
    Relation(#[from] RelationError),
    #[error(transparent)]
    Combine(#[from] CombineError),
    #[error(transparent)]
    Market(#[from] MarketError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RelationDoc {
    Pairs(Vec<(String, String)>),
    Tiers(Vec<Vec<String>>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchoolDoc {
    pub id: String,
    pub capacity: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDoc {
    pub students: Vec<String>,
    pub schools: Vec<SchoolDoc>,
    pub preferences: IndexMap<String, Vec<String>>,
    pub priorities: IndexMap<String, Vec<RelationDoc>>,
}

/// One relation per school.
pub type ProfileDoc = IndexMap<String, RelationDoc>;

/// Assignment per student, `null` for unmatched.
pub type MatchingDoc = IndexMap<String, Option<String>>;

fn student_lookup(names: &[String], name: &str) -> Result<StudentId, FormatError> {
    names
        .iter()
        .position(|n| n == name)
        .map(StudentId)
        .ok_or_else(|| FormatError::UnknownStudent(name.to_string()))
}

pub fn relation_from_doc(names: &[String], doc: &RelationDoc) -> Result<Relation, FormatError> {
    let n = names.len();
    match doc {
        RelationDoc::Pairs(pairs) => {
            let ids = pairs
                .iter()
                .map(|(a, b)| Ok((student_lookup(names, a)?, student_lookup(names, b)?)))
                .collect::<Result<Vec<_>, FormatError>>()?;
            Ok(Relation::from_pairs(n, ids)?)
        }
        RelationDoc::Tiers(tiers) => {
            let ids = tiers
                .iter()
                .map(|t| t.iter().map(|x| student_lookup(names, x)).collect())
                .collect::<Result<Vec<Vec<_>>, _>>()?;
            Ok(Relation::from_tiers(n, &ids)?)
        }
    }
}

/// Tiers for weak orders (which includes total orders), pairs otherwise.
pub fn relation_to_doc(names: &[String], r: &Relation) -> RelationDoc {
    let name = |i: StudentId| names[i.0].clone();
    match r.tiers() {
        Some(tiers) => RelationDoc::Tiers(
            tiers.into_iter().map(|t| t.into_iter().map(name).collect()).collect(),
        ),
        None => RelationDoc::Pairs(r.pairs().map(|(a, b)| (name(a), name(b))).collect()),
    }
}

impl InstanceDoc {
    pub fn parse(text: &str) -> Result<Self, FormatError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn into_instance(self) -> Result<Instance, FormatError> {
        let school_ids: Vec<&str> = self.schools.iter().map(|s| s.id.as_str()).collect();
        let school_of = |name: &str| -> Result<SchoolId, FormatError> {
            school_ids
                .iter()
                .position(|s| *s == name)
                .map(SchoolId)
                .ok_or_else(|| FormatError::UnknownSchool(name.to_string()))
        };
        for key in self.preferences.keys() {
            student_lookup(&self.students, key)?;
        }
        for key in self.priorities.keys() {
            school_of(key)?;
        }
        let prefs = self
            .students
            .iter()
            .map(|i| {
                let list = self
                    .preferences
                    .get(i)
                    .ok_or_else(|| FormatError::MissingPreferences(i.clone()))?;
                list.iter().map(|s| school_of(s)).collect()
            })
            .collect::<Result<Vec<Vec<SchoolId>>, FormatError>>()?;
        let mut sets = Vec::with_capacity(self.schools.len());
        for (k, sc) in self.schools.iter().enumerate() {
            let docs = self
                .priorities
                .get(&sc.id)
                .ok_or_else(|| FormatError::MissingPriorities(sc.id.clone()))?;
            let orders = docs
                .iter()
                .map(|d| relation_from_doc(&self.students, d))
                .collect::<Result<Vec<_>, _>>()?;
            sets.push(PrioritySet::new(SchoolId(k), orders)?);
        }
        let priorities = if sets.iter().all(|ps| ps.orders().len() == 1) {
            Priorities::Single(sets.into_iter().map(|ps| ps.orders()[0].clone()).collect())
        } else {
            Priorities::Multi(MultiProfile::new(sets))
        };
        let schools = self
            .schools
            .into_iter()
            .map(|s| School { name: s.id, capacity: s.capacity })
            .collect();
        Ok(Instance::new(self.students, schools, prefs, priorities)?)
    }

    pub fn from_instance(inst: &Instance) -> Self {
        let names = inst.student_names();
        let priorities = inst
            .schools()
            .map(|s| {
                let docs = match inst.priorities() {
                    Priorities::Single(p) => vec![relation_to_doc(names, &p[s.0])],
                    Priorities::Multi(mp) => mp
                        .get(s)
                        .orders()
                        .iter()
                        .map(|r| relation_to_doc(names, r))
                        .collect(),
                };
                (inst.school_name(s).to_string(), docs)
            })
            .collect();
        InstanceDoc {
            students: names.to_vec(),
            schools: inst
                .school_list()
                .iter()
                .map(|s| SchoolDoc { id: s.name.clone(), capacity: s.capacity })
                .collect(),
            preferences: inst
                .students()
                .map(|i| {
                    let list = inst.prefs().list(i).iter().map(|&s| inst.school_name(s).to_string());
                    (inst.student_name(i).to_string(), list.collect())
                })
                .collect(),
            priorities,
        }
    }
}

pub fn parse_instance(text: &str) -> Result<Instance, FormatError> {
    InstanceDoc::parse(text)?.into_instance()
}

pub fn instance_to_json(inst: &Instance) -> String {
    to_pretty(&InstanceDoc::from_instance(inst))
}

pub fn parse_profile(inst: &Instance, text: &str) -> Result<Vec<Relation>, FormatError> {
    let doc: ProfileDoc = serde_json::from_str(text)?;
    for key in doc.keys() {
        if inst.school(key).is_none() {
            return Err(FormatError::UnknownSchool(key.clone()));
        }
    }
    inst.schools()
        .map(|s| {
            let d = doc
                .get(inst.school_name(s))
                .ok_or_else(|| FormatError::MissingPriorities(inst.school_name(s).to_string()))?;
            relation_from_doc(inst.student_names(), d)
        })
        .collect()
}

pub fn profile_to_json(inst: &Instance, profile: &[Relation]) -> String {
    let doc: ProfileDoc = inst
        .schools()
        .map(|s| {
            (
                inst.school_name(s).to_string(),
                relation_to_doc(inst.student_names(), &profile[s.0]),
            )
        })
        .collect();
    to_pretty(&doc)
}

pub fn matching_to_doc(inst: &Instance, mu: &Matching) -> MatchingDoc {
    inst.students()
        .map(|i| {
            (
                inst.student_name(i).to_string(),
                mu.get(i).map(|s| inst.school_name(s).to_string()),
            )
        })
        .collect()
}

pub fn matching_to_json(inst: &Instance, mu: &Matching) -> String {
    to_pretty(&matching_to_doc(inst, mu))
}

pub fn matching_from_doc(inst: &Instance, doc: &MatchingDoc) -> Result<Matching, FormatError> {
    for key in doc.keys() {
        if inst.student(key).is_none() {
            return Err(FormatError::UnknownStudent(key.clone()));
        }
    }
    let assign = inst
        .students()
        .map(|i| {
            let name = inst.student_name(i);
            match doc.get(name) {
                None => Err(FormatError::MissingAssignment(name.to_string())),
                Some(None) => Ok(None),
                Some(Some(s)) => inst
                    .school(s)
                    .map(Some)
                    .ok_or_else(|| FormatError::UnknownSchool(s.clone())),
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Matching::new(inst, assign)?)
}

pub fn parse_matching(inst: &Instance, text: &str) -> Result<Matching, FormatError> {
    matching_from_doc(inst, &serde_json::from_str(text)?)
}

/// Parses a comma separated list of student names.
pub fn parse_group(inst: &Instance, text: &str) -> Result<Vec<StudentId>, FormatError> {
    text.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| inst.student(x).ok_or_else(|| FormatError::UnknownStudent(x.to_string())))
        .collect()
}

/// Pretty JSON with a trailing newline.
pub fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents always serialize");
    s.push('\n');
    s
}
