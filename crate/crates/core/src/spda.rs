//! Student-proposing deferred acceptance over total priority orders.
//!
//! Proposals are made one at a time. Every school logs the students it
//! rejects, which is how underdemanded schools are detected afterwards: a
//! school is underdemanded exactly when it never rejected anybody.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::market::{Instance, Matching, MarketError, Preferences, SchoolId};
use crate::relations::{Relation, StudentId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DaError {
    #[error("priority of school {0} is not a total order")]
    NotTotalOrder(SchoolId),
    #[error("instance carries several priority orders per school; pass a profile explicitly")]
    MultiProfile,
    #[error(transparent)]
    Market(#[from] MarketError),
}

/// How the next proposer is picked among unmatched students who still have
/// a school left to try.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProposalOrder {
    #[default]
    LowestId,
    /// Uniformly random eligible student, reproducible from the seed.
    Seeded(u64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DaOutcome {
    pub matching: Matching,
    /// Students each school rejected at some step, indexed by school.
    pub rejections: Vec<BTreeSet<StudentId>>,
    pub proposal_count: usize,
}

/// DA on the instance's own single profile.
pub fn run_da(inst: &Instance) -> Result<DaOutcome, DaError> {
    let profile = inst.single_profile().ok_or(DaError::MultiProfile)?;
    run_da_with(inst, profile, ProposalOrder::LowestId)
}

/// DA on `profile`, which must hold one total order per school.
pub fn run_da_with(
    inst: &Instance,
    profile: &[Relation],
    order: ProposalOrder,
) -> Result<DaOutcome, DaError> {
    inst.check_profile(profile)?;
    let ranks = rank_tables(profile)?;
    let students: Vec<StudentId> = inst.students().collect();
    let active = vec![true; inst.school_count()];
    Ok(da_core(inst, &students, &active, inst.prefs().lists(), &ranks, order))
}

pub(crate) fn rank_tables(profile: &[Relation]) -> Result<Vec<Vec<usize>>, DaError> {
    profile
        .iter()
        .enumerate()
        .map(|(s, r)| r.rank_table().ok_or(DaError::NotTotalOrder(SchoolId(s))))
        .collect()
}

/// DA restricted to `students` and to the schools flagged in `active`, with
/// per-student preference lists `lists` (schools outside `active` are
/// skipped). Students outside `students` stay unmatched in the result.
pub(crate) fn da_core(
    inst: &Instance,
    students: &[StudentId],
    active: &[bool],
    lists: &[Vec<SchoolId>],
    ranks: &[Vec<usize>],
    order: ProposalOrder,
) -> DaOutcome {
    let n = inst.student_count();
    let m = inst.school_count();
    let mut next = vec![0usize; n];
    let mut held: Vec<Vec<StudentId>> = vec![Vec::new(); m];
    let mut assign: Vec<Option<SchoolId>> = vec![None; n];
    let mut rejections = vec![BTreeSet::new(); m];
    let mut proposal_count = 0;
    let mut rng = match order {
        ProposalOrder::Seeded(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        ProposalOrder::LowestId => None,
    };

    let advance = |i: StudentId, next: &mut [usize]| {
        let list = &lists[i.0];
        while next[i.0] < list.len() && !active[list[next[i.0]].0] {
            next[i.0] += 1;
        }
        next[i.0] < list.len()
    };

    loop {
        let eligible: Vec<StudentId> = students
            .iter()
            .copied()
            .filter(|&i| assign[i.0].is_none() && advance(i, &mut next))
            .collect();
        let Some(&i) = (match rng.as_mut() {
            None => eligible.first(),
            Some(r) if !eligible.is_empty() => eligible.get(r.gen_range(0..eligible.len())),
            Some(_) => None,
        }) else {
            break;
        };
        let s = lists[i.0][next[i.0]];
        next[i.0] += 1;
        proposal_count += 1;
        let roster = &mut held[s.0];
        roster.push(i);
        assign[i.0] = Some(s);
        if roster.len() > inst.capacity(s) {
            let (worst_pos, &worst) = roster
                .iter()
                .enumerate()
                .max_by_key(|(_, j)| ranks[s.0][j.0])
                .expect("roster is nonempty");
            roster.swap_remove(worst_pos);
            assign[worst.0] = None;
            rejections[s.0].insert(worst);
        }
    }

    DaOutcome {
        matching: Matching::from_assignment(assign, m),
        rejections,
        proposal_count,
    }
}

/// Schools that never rejected anybody during the run.
pub fn underdemanded(out: &DaOutcome, inst: &Instance) -> BTreeSet<SchoolId> {
    inst.schools()
        .filter(|s| out.rejections[s.0].is_empty())
        .collect()
}

/// Schools `s` with `mu(i) R_i s` for every student in `students` under
/// `prefs`.
pub fn underdemanded_by_definition(
    mu: &Matching,
    prefs: &Preferences,
    students: &[StudentId],
    schools: impl IntoIterator<Item = SchoolId>,
) -> BTreeSet<SchoolId> {
    schools
        .into_iter()
        .filter(|&s| {
            students
                .iter()
                .all(|&i| prefs.weakly_prefers(i, mu.get(i), Some(s)))
        })
        .collect()
}
