//! Efficiency-adjusted deferred acceptance over partial-order priorities.
//!
//! Round 1 runs DA under a total extension of the priorities. Each later
//! round settles the students held by underdemanded schools (and the
//! unmatched ones), removes those schools, strips from every remaining
//! student the schools where a settled student who wanted that school has
//! base priority over them, and reruns DA on what is left. The run ends once
//! every school has been removed.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::combine::{m_combine, CombineError, MultiProfile};
use crate::market::{is_stable, Instance, Matching, MarketError, SchoolId};
use crate::relations::{Relation, StudentId};
use crate::spda::{da_core, rank_tables, ProposalOrder};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EadaError {
    #[error("priority of school {0} is not asymmetric")]
    NotAsymmetric(SchoolId),
    #[error("priority of school {0} is not acyclic")]
    CyclicPriority(SchoolId),
    #[error("extension for school {0} is not a total order")]
    ExtensionNotTotal(SchoolId),
    #[error("extension for school {0} does not contain its priority relation")]
    ExtensionMismatch(SchoolId),
    #[error("extension profile has {got} schools, expected {expected}")]
    ExtensionSize { expected: usize, got: usize },
    #[error("combined priority of school {0} is not transitive")]
    RefuseNonPartial(SchoolId),
    #[error("chosen order for school {0} is not a member of its priority set")]
    NotAMember(SchoolId),
    #[error("chosen order for school {0} is not a total order")]
    ChosenNotTotal(SchoolId),
    #[error("round {0} neither settled a student nor removed a school")]
    NoProgress(usize),
    #[error(transparent)]
    Market(#[from] MarketError),
    #[error(transparent)]
    Combine(#[from] CombineError),
}

/// Which schools a settled student strips from the others.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Truncation {
    /// Only schools the settled student prefers to their own assignment.
    #[default]
    Desired,
    /// Every remaining school where the settled student has priority.
    AllRemaining,
}

/// How the underdemanded schools of a round are determined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SettlementRule {
    /// Schools that rejected nobody during the round's DA.
    #[default]
    RejectionFree,
    /// Schools that no remaining student prefers to their round outcome
    /// under the original, untruncated preferences. Only meant for
    /// diagnostics: rounds can stall under this rule.
    OriginalPreferences,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EadaOptions {
    pub truncation: Truncation,
    pub settlement: SettlementRule,
}

/// One total order per school, each containing that school's base relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtensionProfile {
    orders: Vec<Relation>,
}

impl ExtensionProfile {
    pub fn new(base: &[Relation], orders: Vec<Relation>) -> Result<Self, EadaError> {
        let ext = ExtensionProfile { orders };
        ext.check_against(base)?;
        Ok(ext)
    }

    /// The extension built by [`Relation::extend`] for every school.
    pub fn canonical(base: &[Relation]) -> Result<Self, EadaError> {
        let orders = base
            .iter()
            .enumerate()
            .map(|(s, r)| {
                r.extend().map_err(|_| {
                    if r.is_asymmetric() {
                        EadaError::CyclicPriority(SchoolId(s))
                    } else {
                        EadaError::NotAsymmetric(SchoolId(s))
                    }
                })
            })
            .collect::<Result<_, _>>()?;
        Ok(ExtensionProfile { orders })
    }

    pub fn orders(&self) -> &[Relation] {
        &self.orders
    }

    fn check_against(&self, base: &[Relation]) -> Result<(), EadaError> {
        if self.orders.len() != base.len() {
            return Err(EadaError::ExtensionSize {
                expected: base.len(),
                got: self.orders.len(),
            });
        }
        for (s, (b, e)) in base.iter().zip(&self.orders).enumerate() {
            if !e.classify().is_total() {
                return Err(EadaError::ExtensionNotTotal(SchoolId(s)));
            }
            if !b.is_subset(e).unwrap_or(false) {
                return Err(EadaError::ExtensionMismatch(SchoolId(s)));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundRecord {
    pub round: usize,
    /// Students still in play.
    pub students: Vec<StudentId>,
    /// Schools still in play.
    pub schools: Vec<SchoolId>,
    /// Schools newly made unacceptable this round, per student (only
    /// students with a nonempty set appear).
    pub truncations: BTreeMap<StudentId, BTreeSet<SchoolId>>,
    /// Preference lists of the students in play after truncation.
    pub preferences: BTreeMap<StudentId, Vec<SchoolId>>,
    /// DA outcome of this round's subproblem.
    pub outcome: Matching,
    pub rejections: Vec<BTreeSet<StudentId>>,
    pub underdemanded: BTreeSet<SchoolId>,
    pub eliminated: BTreeSet<StudentId>,
    /// Settled assignments so far plus this round's outcome for the rest.
    pub snapshot: Matching,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EadaTrace {
    pub options: EadaOptions,
    pub rounds: Vec<RoundRecord>,
    /// Round in which each student was settled.
    pub student_round: Vec<usize>,
    /// Round in which each school was removed.
    pub school_round: Vec<usize>,
    /// Schools whose base relation is not transitive. When nonempty the
    /// result need not be stable for the base profile.
    pub intransitive: Vec<SchoolId>,
}

impl EadaTrace {
    pub fn is_flagged(&self) -> bool {
        !self.intransitive.is_empty()
    }

    pub fn round(&self, k: usize) -> &RoundRecord {
        &self.rounds[k - 1]
    }

    /// Students settled in rounds `1..=k`.
    pub fn settled_through(&self, k: usize) -> BTreeSet<StudentId> {
        self.rounds[..k]
            .iter()
            .flat_map(|r| r.eliminated.iter().copied())
            .collect()
    }

    pub fn result(&self) -> &Matching {
        &self.rounds.last().expect("a run has at least one round").snapshot
    }

    /// Round-by-round plain-text report.
    pub fn report(&self, inst: &Instance) -> String {
        let names = |ids: &mut dyn Iterator<Item = StudentId>| {
            ids.map(|i| inst.student_name(i).to_string()).collect::<Vec<_>>().join(" ")
        };
        let schools = |ids: &mut dyn Iterator<Item = SchoolId>| {
            ids.map(|s| inst.school_name(s).to_string()).collect::<Vec<_>>().join(" ")
        };
        let mut out = String::new();
        if self.is_flagged() {
            let _ = writeln!(
                out,
                "warning: intransitive priority at {}",
                schools(&mut self.intransitive.iter().copied())
            );
        }
        for r in &self.rounds {
            let _ = writeln!(out, "round {}", r.round);
            let _ = writeln!(out, "  students: {}", names(&mut r.students.iter().copied()));
            let _ = writeln!(out, "  schools: {}", schools(&mut r.schools.iter().copied()));
            for (i, z) in &r.truncations {
                let _ = writeln!(
                    out,
                    "  truncated {}: {}",
                    inst.student_name(*i),
                    schools(&mut z.iter().copied())
                );
            }
            let outcome = r
                .students
                .iter()
                .map(|&i| format!("{}:{}", inst.student_name(i), inst.outcome_name(r.outcome.get(i))))
                .collect::<Vec<_>>()
                .join(" ");
            let _ = writeln!(out, "  outcome: {outcome}");
            let _ = writeln!(out, "  underdemanded: {}", schools(&mut r.underdemanded.iter().copied()));
            let _ = writeln!(out, "  eliminated: {}", names(&mut r.eliminated.iter().copied()));
            let _ = writeln!(out, "  snapshot: {}", r.snapshot.describe(inst));
        }
        let _ = writeln!(out, "result: {}", self.result().describe(inst));
        out.lines().map(|l| format!("{}\n", l.trim_end())).collect()
    }
}

/// `run_eada_with` under default options.
pub fn run_eada(
    inst: &Instance,
    base: &[Relation],
    ext: &ExtensionProfile,
) -> Result<(Matching, EadaTrace), EadaError> {
    run_eada_with(inst, base, ext, EadaOptions::default())
}

pub fn run_eada_with(
    inst: &Instance,
    base: &[Relation],
    ext: &ExtensionProfile,
    opts: EadaOptions,
) -> Result<(Matching, EadaTrace), EadaError> {
    inst.check_profile(base)?;
    for (s, r) in base.iter().enumerate() {
        if !r.is_asymmetric() {
            return Err(EadaError::NotAsymmetric(SchoolId(s)));
        }
        if !r.is_acyclic() {
            return Err(EadaError::CyclicPriority(SchoolId(s)));
        }
    }
    ext.check_against(base)?;
    let intransitive: Vec<SchoolId> = base
        .iter()
        .enumerate()
        .filter(|(_, r)| !r.is_transitive())
        .map(|(s, _)| SchoolId(s))
        .collect();
    let ranks = rank_tables(ext.orders()).map_err(|_| EadaError::ExtensionNotTotal(SchoolId(0)))?;

    let n = inst.student_count();
    let m = inst.school_count();
    let prefs = inst.prefs();
    let mut lists: Vec<Vec<SchoolId>> = prefs.lists().to_vec();
    let mut remaining: BTreeSet<StudentId> = inst.students().collect();
    let mut active = vec![true; m];
    let mut student_round = vec![0; n];
    let mut school_round = vec![0; m];
    let mut snapshot = Matching::unmatched(n, m);
    let mut last_eliminated: BTreeSet<StudentId> = BTreeSet::new();
    let mut rounds = Vec::new();

    for k in 1.. {
        let students: Vec<StudentId> = remaining.iter().copied().collect();
        let schools: Vec<SchoolId> = inst.schools().filter(|s| active[s.0]).collect();

        let mut truncations = BTreeMap::new();
        for &i in &students {
            let z: BTreeSet<SchoolId> = schools
                .iter()
                .copied()
                .filter(|&s| {
                    last_eliminated.iter().any(|&j| {
                        base[s.0].contains(j, i)
                            && match opts.truncation {
                                Truncation::Desired => {
                                    prefs.prefers(j, Some(s), snapshot.get(j))
                                }
                                Truncation::AllRemaining => true,
                            }
                    })
                })
                .collect();
            if !z.is_empty() {
                lists[i.0].retain(|s| !z.contains(s));
                truncations.insert(i, z);
            }
        }

        let da = da_core(inst, &students, &active, &lists, &ranks, ProposalOrder::LowestId);
        let underdemanded: BTreeSet<SchoolId> = match opts.settlement {
            SettlementRule::RejectionFree => schools
                .iter()
                .copied()
                .filter(|s| da.rejections[s.0].is_empty())
                .collect(),
            SettlementRule::OriginalPreferences => schools
                .iter()
                .copied()
                .filter(|&s| {
                    students
                        .iter()
                        .all(|&i| prefs.weakly_prefers(i, da.matching.get(i), Some(s)))
                })
                .collect(),
        };
        let eliminated: BTreeSet<StudentId> = students
            .iter()
            .copied()
            .filter(|&i| da.matching.get(i).is_none_or(|s| underdemanded.contains(&s)))
            .collect();

        for &i in &students {
            snapshot.set(i, da.matching.get(i));
        }
        for &i in &eliminated {
            student_round[i.0] = k;
            remaining.remove(&i);
        }
        for &s in &underdemanded {
            school_round[s.0] = k;
            active[s.0] = false;
        }

        let preferences = students.iter().map(|&i| (i, lists[i.0].clone())).collect();
        let stalled = eliminated.is_empty() && underdemanded.is_empty();
        rounds.push(RoundRecord {
            round: k,
            students,
            schools,
            truncations,
            preferences,
            outcome: da.matching,
            rejections: da.rejections,
            underdemanded,
            eliminated: eliminated.clone(),
            snapshot: snapshot.clone(),
        });
        if stalled {
            return Err(EadaError::NoProgress(k));
        }
        last_eliminated = eliminated;
        if active.iter().all(|a| !a) {
            break;
        }
    }

    let trace = EadaTrace {
        options: opts,
        rounds,
        student_round,
        school_round,
        intransitive,
    };
    Ok((snapshot, trace))
}

/// EADA on the combined profile of `mp`, using `chosen[s]`-th order of each
/// school's set as the extension.
pub fn run_ea_multi(
    inst: &Instance,
    mp: &MultiProfile,
    chosen: &[usize],
) -> Result<(Matching, EadaTrace), EadaError> {
    let (base, ext) = multi_extension(mp, chosen)?;
    run_eada(inst, &base, &ext)
}

/// The combined profile of `mp` and the extension formed by the chosen
/// members, after checking both are usable.
pub fn multi_extension(
    mp: &MultiProfile,
    chosen: &[usize],
) -> Result<(Vec<Relation>, ExtensionProfile), EadaError> {
    if chosen.len() != mp.len() {
        return Err(EadaError::ExtensionSize {
            expected: mp.len(),
            got: chosen.len(),
        });
    }
    let mut base = Vec::with_capacity(mp.len());
    let mut orders = Vec::with_capacity(mp.len());
    for (ps, &c) in mp.sets().iter().zip(chosen) {
        let m = m_combine(ps)?;
        if !m.is_transitive() {
            return Err(EadaError::RefuseNonPartial(ps.school));
        }
        let member = ps.orders().get(c).ok_or(EadaError::NotAMember(ps.school))?;
        if !member.classify().is_total() {
            return Err(EadaError::ChosenNotTotal(ps.school));
        }
        base.push(m);
        orders.push(member.clone());
    }
    let ext = ExtensionProfile::new(&base, orders)?;
    Ok((base, ext))
}

/// First total member of each school's set, if every school has one.
pub fn total_members(mp: &MultiProfile) -> Option<Vec<usize>> {
    mp.sets().iter().map(|ps| ps.first_total()).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceViolation {
    EmptyElimination { round: usize },
    TooManyRounds { rounds: usize },
    SettledChanged { student: StudentId, round: usize },
    Unstable { round: usize },
    Worsened { student: StudentId, round: usize },
    RosterSize { school: SchoolId, round: usize },
}

/// Checks the structural guarantees of a trace. The per-round stability,
/// improvement and roster-size checks only apply when every base relation
/// is transitive.
pub fn check_trace(trace: &EadaTrace, inst: &Instance, base: &[Relation]) -> Vec<TraceViolation> {
    let mut out = Vec::new();
    let k_max = trace.rounds.len();
    if k_max > inst.student_count() + 1 {
        out.push(TraceViolation::TooManyRounds { rounds: k_max });
    }
    for r in &trace.rounds {
        if r.eliminated.is_empty() && !r.students.is_empty() {
            out.push(TraceViolation::EmptyElimination { round: r.round });
        }
    }
    for i in inst.students() {
        let settled = trace.student_round[i.0];
        if settled == 0 {
            continue;
        }
        let at = trace.round(settled).snapshot.get(i);
        for r in &trace.rounds[settled..] {
            if r.snapshot.get(i) != at {
                out.push(TraceViolation::SettledChanged { student: i, round: r.round });
            }
        }
    }
    if !trace.is_flagged() {
        for r in &trace.rounds {
            if !is_stable(&r.snapshot, inst, base) {
                out.push(TraceViolation::Unstable { round: r.round });
            }
        }
        for pair in trace.rounds.windows(2) {
            let (prev, cur) = (&pair[0].snapshot, &pair[1].snapshot);
            for i in inst.students() {
                if !inst.prefs().weakly_prefers(i, cur.get(i), prev.get(i)) {
                    out.push(TraceViolation::Worsened { student: i, round: pair[1].round });
                }
            }
            for s in inst.schools() {
                if cur.roster(s).len() != prev.roster(s).len() {
                    out.push(TraceViolation::RosterSize { school: s, round: pair[1].round });
                }
            }
        }
    }
    out
}
