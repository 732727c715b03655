//! Combining a school's several priority orders into one relation.
//!
//! `m_combine` keeps a pair when some order asserts it and no order asserts
//! the reverse. `w_combine` keeps a pair only when every order asserts it.
//! Fairness for these single relations coincides with M-fairness and weak
//! M-fairness for the underlying sets.

use thiserror::Error;

use crate::market::SchoolId;
use crate::relations::{Relation, RelationError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CombineError {
    #[error("priority set of school {0} is empty")]
    Empty(SchoolId),
    #[error("order {order} of school {school} is not asymmetric")]
    NotAsymmetric { school: SchoolId, order: usize },
    #[error("order {order} of school {school} is not a total order")]
    NotTotal { school: SchoolId, order: usize },
    #[error("candidate order for school {0} is not a total order")]
    CandidateNotTotal(SchoolId),
    #[error(transparent)]
    Relation(#[from] RelationError),
}

/// The set of priority orders of one school, in input order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrioritySet {
    pub school: SchoolId,
    orders: Vec<Relation>,
}

impl PrioritySet {
    pub fn new(school: SchoolId, orders: Vec<Relation>) -> Result<Self, CombineError> {
        let first = orders.first().ok_or(CombineError::Empty(school))?;
        let n = first.ground_size();
        for o in &orders {
            if o.ground_size() != n {
                return Err(RelationError::GroundMismatch(n, o.ground_size()).into());
            }
        }
        Ok(PrioritySet { school, orders })
    }

    pub fn orders(&self) -> &[Relation] {
        &self.orders
    }

    pub fn ground_size(&self) -> usize {
        self.orders[0].ground_size()
    }

    fn require_asymmetric(&self) -> Result<(), CombineError> {
        match self.orders.iter().position(|o| !o.is_asymmetric()) {
            Some(order) => Err(CombineError::NotAsymmetric {
                school: self.school,
                order,
            }),
            None => Ok(()),
        }
    }

    fn require_total(&self) -> Result<(), CombineError> {
        match self.orders.iter().position(|o| !o.classify().is_total()) {
            Some(order) => Err(CombineError::NotTotal {
                school: self.school,
                order,
            }),
            None => Ok(()),
        }
    }

    /// Index of the first total order in the set, if any.
    pub fn first_total(&self) -> Option<usize> {
        self.orders.iter().position(|o| o.classify().is_total())
    }
}

/// One priority set per school, indexed by school.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiProfile {
    sets: Vec<PrioritySet>,
}

impl MultiProfile {
    pub fn new(sets: Vec<PrioritySet>) -> Self {
        MultiProfile { sets }
    }

    /// Pairs each school's orders, e.g. a base profile with an adjusted one.
    pub fn from_profiles(profiles: &[&[Relation]]) -> Result<Self, CombineError> {
        let schools = profiles.first().map_or(0, |p| p.len());
        let sets = (0..schools)
            .map(|s| {
                let orders = profiles.iter().map(|p| p[s].clone()).collect();
                PrioritySet::new(SchoolId(s), orders)
            })
            .collect::<Result<_, _>>()?;
        Ok(MultiProfile { sets })
    }

    pub fn sets(&self) -> &[PrioritySet] {
        &self.sets
    }

    pub fn get(&self, school: SchoolId) -> &PrioritySet {
        &self.sets[school.0]
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// `m_combine` applied school by school.
    pub fn m_profile(&self) -> Result<Vec<Relation>, CombineError> {
        self.sets.iter().map(m_combine).collect()
    }

    /// `w_combine` applied school by school.
    pub fn w_profile(&self) -> Result<Vec<Relation>, CombineError> {
        self.sets.iter().map(w_combine).collect()
    }
}

/// Asymmetric part of the union of the school's orders.
pub fn m_combine(ps: &PrioritySet) -> Result<Relation, CombineError> {
    ps.require_asymmetric()?;
    let mut union = Relation::empty(ps.ground_size());
    for o in &ps.orders {
        union = union.union(o)?;
    }
    Ok(union.asymmetric_part())
}

/// Intersection of the school's orders.
pub fn w_combine(ps: &PrioritySet) -> Result<Relation, CombineError> {
    ps.require_asymmetric()?;
    let mut acc = ps.orders[0].clone();
    for o in &ps.orders[1..] {
        acc = acc.intersection(o)?;
    }
    Ok(acc)
}

/// For sets of total orders, `m_combine` must coincide with the plain
/// intersection. Returns whether it does.
pub fn check_total_intersection(ps: &PrioritySet) -> Result<bool, CombineError> {
    ps.require_total()?;
    Ok(m_combine(ps)? == w_combine(ps)?)
}

/// Whether a total order contains `m_combine(ps)`, i.e. is usable as the
/// extension for this school.
pub fn is_member_extension(ps: &PrioritySet, candidate: &Relation) -> Result<bool, CombineError> {
    if !candidate.classify().is_total() {
        return Err(CombineError::CandidateNotTotal(ps.school));
    }
    Ok(m_combine(ps)?.is_subset(candidate)?)
}
