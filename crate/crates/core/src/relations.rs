//! Finite binary relations over a fixed ground set of students.
//!
//! A [`Relation`] stores an adjacency matrix over `0..n`, where `n` is the
//! number of students in the instance. A pair `(a, b)` means that `a` has
//! higher priority than `b`. Relations are irreflexive by construction.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Index of a student within an instance. Ordering follows the order in which
/// students are declared, and is used for every deterministic tie-break.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StudentId(pub usize);

impl StudentId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for StudentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RelationError {
    #[error("student {0} is outside a ground set of size {1}")]
    OutOfGround(StudentId, usize),
    #[error("reflexive pair ({0}, {0})")]
    Reflexive(StudentId),
    #[error("student {0} appears more than once in a tier list")]
    DuplicateInTiers(StudentId),
    #[error("relation is not acyclic")]
    CyclicRelation,
    #[error("relation is not asymmetric: both ({0}, {1}) and ({1}, {0}) are present")]
    NotAsymmetric(StudentId, StudentId),
    #[error("ground sets differ ({0} vs {1})")]
    GroundMismatch(usize, usize),
}

/// Strongest order class a relation belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum OrderKind {
    General,
    Partial,
    Weak,
    Total,
}

impl fmt::Display for OrderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            OrderKind::General => "general",
            OrderKind::Partial => "partial",
            OrderKind::Weak => "weak",
            OrderKind::Total => "total",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RelationClass {
    pub kind: OrderKind,
    pub asymmetric: bool,
    pub complete: bool,
    pub transitive: bool,
    pub negatively_transitive: bool,
    pub acyclic: bool,
}

impl RelationClass {
    pub fn is_partial(&self) -> bool {
        self.kind >= OrderKind::Partial
    }

    pub fn is_weak(&self) -> bool {
        self.kind >= OrderKind::Weak
    }

    pub fn is_total(&self) -> bool {
        self.kind == OrderKind::Total
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Relation {
    n: usize,
    bits: Vec<bool>,
}

impl fmt::Debug for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Relation")
            .field("ground", &self.n)
            .field("pairs", &self.pairs().map(|(a, b)| (a.0, b.0)).collect::<Vec<_>>())
            .finish()
    }
}

impl Relation {
    pub fn empty(n: usize) -> Self {
        Relation {
            n,
            bits: vec![false; n * n],
        }
    }

    pub fn from_pairs<I>(n: usize, pairs: I) -> Result<Self, RelationError>
    where
        I: IntoIterator<Item = (StudentId, StudentId)>,
    {
        let mut r = Relation::empty(n);
        for (a, b) in pairs {
            r.insert(a, b)?;
        }
        Ok(r)
    }

    /// Weak order in which every member of an earlier tier beats every member
    /// of a later tier. Students that appear in no tier are incomparable to all.
    pub fn from_tiers(n: usize, tiers: &[Vec<StudentId>]) -> Result<Self, RelationError> {
        let mut seen = BTreeSet::new();
        for s in tiers.iter().flatten() {
            if s.0 >= n {
                return Err(RelationError::OutOfGround(*s, n));
            }
            if !seen.insert(*s) {
                return Err(RelationError::DuplicateInTiers(*s));
            }
        }
        let mut r = Relation::empty(n);
        for (t, upper) in tiers.iter().enumerate() {
            for lower in &tiers[t + 1..] {
                for &a in upper {
                    for &b in lower {
                        r.set(a, b, true);
                    }
                }
            }
        }
        Ok(r)
    }

    /// Total order listing students from highest to lowest priority.
    pub fn from_ranking(n: usize, ranking: &[StudentId]) -> Result<Self, RelationError> {
        let tiers: Vec<Vec<StudentId>> = ranking.iter().map(|&s| vec![s]).collect();
        Relation::from_tiers(n, &tiers)
    }

    pub fn ground_size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn contains(&self, a: StudentId, b: StudentId) -> bool {
        self.bits[a.0 * self.n + b.0]
    }

    #[inline]
    fn get(&self, a: usize, b: usize) -> bool {
        self.bits[a * self.n + b]
    }

    #[inline]
    fn set(&mut self, a: StudentId, b: StudentId, v: bool) {
        self.bits[a.0 * self.n + b.0] = v;
    }

    pub fn insert(&mut self, a: StudentId, b: StudentId) -> Result<(), RelationError> {
        for s in [a, b] {
            if s.0 >= self.n {
                return Err(RelationError::OutOfGround(s, self.n));
            }
        }
        if a == b {
            return Err(RelationError::Reflexive(a));
        }
        self.set(a, b, true);
        Ok(())
    }

    pub fn remove(&mut self, a: StudentId, b: StudentId) {
        if a.0 < self.n && b.0 < self.n {
            self.set(a, b, false);
        }
    }

    /// Pairs in lexicographic order.
    pub fn pairs(&self) -> impl Iterator<Item = (StudentId, StudentId)> + '_ {
        (0..self.n).flat_map(move |a| {
            (0..self.n)
                .filter(move |&b| self.get(a, b))
                .map(move |b| (StudentId(a), StudentId(b)))
        })
    }

    pub fn len(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    fn check_ground(&self, other: &Relation) -> Result<(), RelationError> {
        if self.n != other.n {
            return Err(RelationError::GroundMismatch(self.n, other.n));
        }
        Ok(())
    }

    pub fn union(&self, other: &Relation) -> Result<Relation, RelationError> {
        self.check_ground(other)?;
        let bits = self.bits.iter().zip(&other.bits).map(|(a, b)| *a || *b).collect();
        Ok(Relation { n: self.n, bits })
    }

    pub fn intersection(&self, other: &Relation) -> Result<Relation, RelationError> {
        self.check_ground(other)?;
        let bits = self.bits.iter().zip(&other.bits).map(|(a, b)| *a && *b).collect();
        Ok(Relation { n: self.n, bits })
    }

    /// `true` iff every pair of `self` is in `other`.
    pub fn is_subset(&self, other: &Relation) -> Result<bool, RelationError> {
        self.check_ground(other)?;
        Ok(self.bits.iter().zip(&other.bits).all(|(a, b)| !*a || *b))
    }

    /// Pairs `(x, y)` of `self` such that `(y, x)` is not in `self`.
    pub fn asymmetric_part(&self) -> Relation {
        let mut out = Relation::empty(self.n);
        for a in 0..self.n {
            for b in 0..self.n {
                if self.get(a, b) && !self.get(b, a) {
                    out.bits[a * self.n + b] = true;
                }
            }
        }
        out
    }

    /// First pair whose reverse is also present.
    pub fn symmetric_witness(&self) -> Option<(StudentId, StudentId)> {
        for a in 0..self.n {
            for b in a + 1..self.n {
                if self.get(a, b) && self.get(b, a) {
                    return Some((StudentId(a), StudentId(b)));
                }
            }
        }
        None
    }

    pub fn is_asymmetric(&self) -> bool {
        self.symmetric_witness().is_none()
    }

    pub fn is_complete(&self) -> bool {
        (0..self.n).all(|a| (a + 1..self.n).all(|b| self.get(a, b) || self.get(b, a)))
    }

    pub fn is_transitive(&self) -> bool {
        self.transitivity_witness().is_none()
    }

    /// `(x, y, z)` with `(x, y)` and `(y, z)` present but `(x, z)` missing.
    pub fn transitivity_witness(&self) -> Option<(StudentId, StudentId, StudentId)> {
        for x in 0..self.n {
            for y in 0..self.n {
                if !self.get(x, y) {
                    continue;
                }
                for z in 0..self.n {
                    if self.get(y, z) && !self.get(x, z) {
                        return Some((StudentId(x), StudentId(y), StudentId(z)));
                    }
                }
            }
        }
        None
    }

    pub fn is_negatively_transitive(&self) -> bool {
        for x in 0..self.n {
            for y in 0..self.n {
                if self.get(x, y) {
                    continue;
                }
                for z in 0..self.n {
                    if !self.get(y, z) && self.get(x, z) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Acyclicity over chains of asymmetric steps: there is no
    /// `x0 -> x1 -> ... -> xK` (K >= 2) with every step `(x_{k-1}, x_k)`
    /// present and unreversed while `(xK, x0)` is present.
    pub fn is_acyclic(&self) -> bool {
        let n = self.n;
        let strict = self.asymmetric_part();
        // reach[a][b]: b reachable from a by one or more asymmetric steps
        let mut reach = strict.bits.clone();
        for k in 0..n {
            for a in 0..n {
                if !reach[a * n + k] {
                    continue;
                }
                for b in 0..n {
                    if reach[k * n + b] {
                        reach[a * n + b] = true;
                    }
                }
            }
        }
        // two or more steps: one step followed by a path
        for x0 in 0..n {
            for mid in 0..n {
                if !strict.get(x0, mid) {
                    continue;
                }
                for xk in 0..n {
                    if xk != x0 && reach[mid * n + xk] && self.get(xk, x0) {
                        return false;
                    }
                }
            }
        }
        true
    }

    pub fn classify(&self) -> RelationClass {
        let asymmetric = self.is_asymmetric();
        let complete = self.is_complete();
        let transitive = self.is_transitive();
        let negatively_transitive = self.is_negatively_transitive();
        let acyclic = self.is_acyclic();
        let partial = asymmetric && transitive;
        let kind = if partial && negatively_transitive && complete {
            OrderKind::Total
        } else if partial && negatively_transitive {
            OrderKind::Weak
        } else if partial {
            OrderKind::Partial
        } else {
            OrderKind::General
        };
        RelationClass {
            kind,
            asymmetric,
            complete,
            transitive,
            negatively_transitive,
            acyclic,
        }
    }

    /// A total order containing `self`. Repeatedly emits the lowest-indexed
    /// student with no remaining predecessor.
    pub fn extend(&self) -> Result<Relation, RelationError> {
        if let Some((a, b)) = self.symmetric_witness() {
            return Err(RelationError::NotAsymmetric(a, b));
        }
        if !self.is_acyclic() {
            return Err(RelationError::CyclicRelation);
        }
        let n = self.n;
        let mut indegree = vec![0usize; n];
        for (_, b) in self.pairs() {
            indegree[b.0] += 1;
        }
        let mut ready: BTreeSet<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
        let mut ranking = Vec::with_capacity(n);
        while let Some(v) = ready.pop_first() {
            ranking.push(StudentId(v));
            for (w, deg) in indegree.iter_mut().enumerate() {
                if self.get(v, w) {
                    *deg -= 1;
                    if *deg == 0 {
                        ready.insert(w);
                    }
                }
            }
        }
        if ranking.len() != n {
            return Err(RelationError::CyclicRelation);
        }
        Relation::from_ranking(n, &ranking)
    }

    /// Students from highest to lowest priority, if the relation is total.
    pub fn ranking(&self) -> Option<Vec<StudentId>> {
        if !self.classify().is_total() {
            return None;
        }
        let mut order: Vec<(usize, usize)> = (0..self.n)
            .map(|b| ((0..self.n).filter(|&a| self.get(a, b)).count(), b))
            .collect();
        order.sort_unstable();
        Some(order.into_iter().map(|(_, b)| StudentId(b)).collect())
    }

    /// Tier decomposition, if the relation is a weak order.
    pub fn tiers(&self) -> Option<Vec<Vec<StudentId>>> {
        if !self.classify().is_weak() {
            return None;
        }
        let mut by_level: std::collections::BTreeMap<usize, Vec<StudentId>> = Default::default();
        for b in 0..self.n {
            let above = (0..self.n).filter(|&a| self.get(a, b)).count();
            by_level.entry(above).or_default().push(StudentId(b));
        }
        Some(by_level.into_values().collect())
    }

    /// Position of each student in a total order (0 = highest).
    pub(crate) fn rank_table(&self) -> Option<Vec<usize>> {
        let ranking = self.ranking()?;
        let mut rank = vec![0; self.n];
        for (pos, s) in ranking.iter().enumerate() {
            rank[s.0] = pos;
        }
        Some(rank)
    }
}
