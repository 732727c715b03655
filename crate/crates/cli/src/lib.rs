//! Command implementations behind the `multiprio` binary.
//!
//! Every command returns an [`Output`] instead of printing, so the binary
//! and the tests share one code path.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success, or the checked property holds |
//! | 1 | the checked property fails (`check`, `compare`) |
//! | 2 | unreadable or malformed input, bad arguments |
//! | 3 | an algorithm precondition does not hold |
//! | 4 | instance too large for the oracle |
//! | 5 | generator ran out of attempts |

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use multiprio::eada::{multi_extension, total_members};
use multiprio::format::{
    instance_to_json, matching_to_doc, matching_to_json, parse_group, parse_instance,
    parse_matching, parse_profile, profile_to_json, FormatError,
};
use multiprio::gen::{
    improvement_triple, instance_for_triple, random_instance, random_multi_instance, GenConfig,
    GenError, PriorityKind,
};
use multiprio::improvements::{check_responsiveness, CheckMode};
use multiprio::market::{
    fairness_violations, is_individually_rational, m_fairness_violations, waste,
    weak_m_fairness_violations,
};
use multiprio::oracle::{self, OracleReport};
use multiprio::spda::{run_da_with, ProposalOrder};
use multiprio::{
    phi_star, run_eada, DaError, EadaError, ExtensionProfile, ImprovementError, Instance,
    Matching, OracleError, Relation, StudentId, ViolationWitness,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Parser)]
#[command(name = "multiprio", version, about = "School choice with multiple priority orders")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute a matching.
    Solve(SolveArgs),
    /// Audit a matching against a stability notion.
    Check(CheckArgs),
    /// Enumerate all matchings of a small instance.
    Oracle(OracleArgs),
    /// Compare the outcomes of two improvements of the same profile.
    Compare(CompareArgs),
    /// Generate random instances.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    /// Deferred acceptance on a single total-order profile.
    Da,
    /// Efficiency-adjusted DA; multi-order instances use their combined profile.
    Eada,
    /// EADA with one member of each school's set as extension.
    EaMulti,
    /// EADA on the instance profile paired with `--adjusted`.
    PhiStar,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, value_enum)]
    pub algo: Algo,
    /// Extension profile for `eada` (canonical extension when omitted).
    #[arg(long)]
    pub extension: Option<PathBuf>,
    /// Adjusted profile for `phi-star`.
    #[arg(long)]
    pub adjusted: Option<PathBuf>,
    /// Member index per school for `ea-multi`, comma separated; a single
    /// value applies to every school. Defaults to the first total member.
    #[arg(long)]
    pub chosen: Option<String>,
    /// Proposal order seed for `da` (lowest id first when omitted).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Print the round-by-round report to stderr.
    #[arg(long)]
    pub trace: bool,
    /// Write the matching here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NotionArg {
    Ir,
    Nonwasteful,
    Fair,
    Stable,
    MStable,
    WeaklyMStable,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub matching: PathBuf,
    #[arg(long, value_enum)]
    pub notion: NotionArg,
    /// Profile for `fair`/`stable` instead of the instance's own.
    #[arg(long)]
    pub profile: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// Comma separated students for the group-optimal set.
    #[arg(long)]
    pub group: Option<String>,
    /// Print the report as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// Base profile (the instance's own when omitted).
    #[arg(long)]
    pub base: Option<PathBuf>,
    #[arg(long)]
    pub more: PathBuf,
    #[arg(long)]
    pub less: PathBuf,
    #[arg(long)]
    pub group: String,
    /// Run even when the profiles are not nested improvements.
    #[arg(long)]
    pub diagnostic: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenMode {
    Single,
    Multi,
    ImprovementTriple,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Total,
    Weak,
    Partial,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "single")]
    pub mode: GenMode,
    #[arg(long, default_value_t = 5)]
    pub students: usize,
    #[arg(long, default_value_t = 3)]
    pub schools: usize,
    #[arg(long, default_value_t = 2)]
    pub max_capacity: usize,
    /// Priority kind for `single`.
    #[arg(long, value_enum, default_value = "total")]
    pub kind: KindArg,
    /// Most orders per school for `multi`.
    #[arg(long, default_value_t = 3)]
    pub max_orders: usize,
    /// Rejection-sampling attempts for `improvement-triple`.
    #[arg(long, default_value_t = 10_000)]
    pub budget: usize,
    /// Output file for `single` and `multi` (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output directory for `improvement-triple`.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Refuse sizes the oracle cannot enumerate.
    #[arg(long)]
    pub oracle_compatible: bool,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Format { path: PathBuf, source: FormatError },
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Precondition(String),
    #[error(transparent)]
    Da(#[from] DaError),
    #[error(transparent)]
    Eada(#[from] EadaError),
    #[error(transparent)]
    Improvement(#[from] ImprovementError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Gen(#[from] GenError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Format { .. } | CliError::Usage(_) => 2,
            CliError::Gen(GenError::Empty) => 2,
            CliError::Precondition(_) => 3,
            CliError::Da(_) | CliError::Eada(_) | CliError::Improvement(_) => 3,
            CliError::Oracle(OracleError::TooLarge { .. }) => 4,
            CliError::Oracle(OracleError::Market(_)) => 3,
            CliError::Gen(GenError::Exhausted(_)) => 5,
        }
    }
}

/// What a command printed and how it exited.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Output {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl Output {
    fn ok(stdout: String) -> Self {
        Output { stdout, ..Output::default() }
    }
}

pub fn run(cli: Cli) -> Output {
    let result = match cli.command {
        Command::Solve(a) => solve(&a),
        Command::Check(a) => check(&a),
        Command::Oracle(a) => run_oracle(&a),
        Command::Compare(a) => compare(&a),
        Command::Gen(a) => generate(&a),
    };
    result.unwrap_or_else(|e| Output {
        stdout: String::new(),
        stderr: format!("error: {e}\n"),
        code: e.exit_code(),
    })
}

/// Parses `args` (including the program name) and runs the command. Usage
/// errors come back with clap's message and exit code.
pub fn run_args<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                Output { stdout: String::new(), stderr: text, code: e.exit_code() }
            } else {
                Output::ok(text)
            }
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn with_path<T>(path: &Path, r: Result<T, FormatError>) -> Result<T, CliError> {
    r.map_err(|source| CliError::Format { path: path.to_path_buf(), source })
}

fn load_instance(path: &Path) -> Result<Instance, CliError> {
    with_path(path, parse_instance(&read(path)?))
}

fn load_profile(inst: &Instance, path: &Path) -> Result<Vec<Relation>, CliError> {
    with_path(path, parse_profile(inst, &read(path)?))
}

fn load_matching(inst: &Instance, path: &Path) -> Result<Matching, CliError> {
    with_path(path, parse_matching(inst, &read(path)?))
}

fn single_profile(inst: &Instance) -> Result<&[Relation], CliError> {
    inst.single_profile()
        .ok_or_else(|| CliError::Usage("instance has several orders per school".into()))
}

fn parse_chosen(text: &str, schools: usize) -> Result<Vec<usize>, CliError> {
    let values = text
        .split(',')
        .map(|x| x.trim().parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Usage(format!("--chosen: {e}")))?;
    match values.len() {
        1 => Ok(vec![values[0]; schools]),
        n if n == schools => Ok(values),
        n => Err(CliError::Usage(format!("--chosen lists {n} members for {schools} schools"))),
    }
}

fn solve(a: &SolveArgs) -> Result<Output, CliError> {
    let inst = load_instance(&a.instance)?;
    let mut stderr = String::new();
    let mu = match a.algo {
        Algo::Da => {
            let order = a.seed.map_or(ProposalOrder::LowestId, ProposalOrder::Seeded);
            run_da_with(&inst, single_profile(&inst)?, order)?.matching
        }
        Algo::Eada => {
            let base = match inst.multi_profile() {
                Some(mp) => mp.m_profile().map_err(EadaError::from)?,
                None => inst.single_profile().expect("single or multi").to_vec(),
            };
            let ext = match &a.extension {
                Some(p) => ExtensionProfile::new(&base, load_profile(&inst, p)?)?,
                None => ExtensionProfile::canonical(&base)?,
            };
            let (mu, trace) = run_eada(&inst, &base, &ext)?;
            if a.trace {
                stderr = trace.report(&inst);
            }
            mu
        }
        Algo::EaMulti => {
            let mp = inst
                .multi_profile()
                .ok_or_else(|| CliError::Usage("ea-multi needs several orders per school".into()))?;
            let chosen = match &a.chosen {
                Some(text) => parse_chosen(text, inst.school_count())?,
                None => total_members(mp).ok_or_else(|| {
                    CliError::Precondition("some school has no total order; pass --chosen".into())
                })?,
            };
            let (base, ext) = multi_extension(mp, &chosen)?;
            let (mu, trace) = run_eada(&inst, &base, &ext)?;
            if a.trace {
                stderr = trace.report(&inst);
            }
            mu
        }
        Algo::PhiStar => {
            let path = a
                .adjusted
                .as_ref()
                .ok_or_else(|| CliError::Usage("phi-star needs --adjusted".into()))?;
            let adjusted = load_profile(&inst, path)?;
            let (mu, trace) = phi_star(&inst, single_profile(&inst)?, &adjusted)?;
            if a.trace {
                stderr = trace.report(&inst);
            }
            mu
        }
    };
    let json = matching_to_json(&inst, &mu);
    let stdout = match &a.out {
        Some(path) => {
            write(path, &json)?;
            String::new()
        }
        None => json,
    };
    Ok(Output { stdout, stderr, code: 0 })
}

fn witness_line(inst: &Instance, w: &ViolationWitness, orders: usize) -> String {
    let mut line = format!(
        "violation: {} over {} at {}",
        inst.student_name(w.student),
        inst.student_name(w.incumbent),
        inst.school_name(w.school)
    );
    if orders > 1 {
        let _ = write!(line, " (order {})", w.order + 1);
    }
    line
}

fn check(a: &CheckArgs) -> Result<Output, CliError> {
    let inst = load_instance(&a.instance)?;
    let mu = load_matching(&inst, &a.matching)?;
    let mut lines = vec![format!("matching: {}", mu.describe(&inst))];

    let irrational: Vec<StudentId> = inst
        .students()
        .filter(|&i| mu.get(i).is_some_and(|s| !inst.prefs().is_acceptable(i, s)))
        .collect();
    debug_assert_eq!(irrational.is_empty(), is_individually_rational(&mu, &inst));
    let wasted = waste(&mu, &inst);
    let ir_lines = |lines: &mut Vec<String>| {
        for &i in &irrational {
            lines.push(format!(
                "unacceptable: {} at {}",
                inst.student_name(i),
                inst.outcome_name(mu.get(i))
            ));
        }
    };
    let waste_lines = |lines: &mut Vec<String>| {
        for (i, s) in &wasted {
            lines.push(format!("waste: {} at {}", inst.student_name(*i), inst.school_name(*s)));
        }
    };

    let profile = match &a.profile {
        Some(p) => Some(load_profile(&inst, p)?),
        None => inst.single_profile().map(<[Relation]>::to_vec),
    };
    let violations = match a.notion {
        NotionArg::Ir | NotionArg::Nonwasteful => Vec::new(),
        NotionArg::Fair | NotionArg::Stable => {
            let p = profile.as_deref().ok_or_else(|| {
                CliError::Usage("instance has several orders per school; pass --profile".into())
            })?;
            fairness_violations(&mu, &inst, p)
        }
        NotionArg::MStable | NotionArg::WeaklyMStable => {
            let mp = inst.multi_profile().ok_or_else(|| {
                CliError::Usage("m-stability needs several orders per school".into())
            })?;
            if a.notion == NotionArg::MStable {
                m_fairness_violations(&mu, &inst, mp)
            } else {
                weak_m_fairness_violations(&mu, &inst, mp)
            }
        }
    };
    let orders = inst
        .multi_profile()
        .filter(|_| matches!(a.notion, NotionArg::MStable | NotionArg::WeaklyMStable))
        .map_or(1, |mp| mp.sets().iter().map(|ps| ps.orders().len()).max().unwrap_or(1));

    let full = matches!(a.notion, NotionArg::Stable | NotionArg::MStable | NotionArg::WeaklyMStable);
    let holds = match a.notion {
        NotionArg::Ir => {
            ir_lines(&mut lines);
            irrational.is_empty()
        }
        NotionArg::Nonwasteful => {
            waste_lines(&mut lines);
            wasted.is_empty()
        }
        _ => {
            if full {
                ir_lines(&mut lines);
                waste_lines(&mut lines);
            }
            for w in &violations {
                lines.push(witness_line(&inst, w, orders));
            }
            violations.is_empty() && (!full || (irrational.is_empty() && wasted.is_empty()))
        }
    };
    let name = match a.notion {
        NotionArg::Ir => "ir",
        NotionArg::Nonwasteful => "nonwasteful",
        NotionArg::Fair => "fair",
        NotionArg::Stable => "stable",
        NotionArg::MStable => "m-stable",
        NotionArg::WeaklyMStable => "weakly-m-stable",
    };
    lines.push(format!("{name}: {}", if holds { "yes" } else { "no" }));
    let mut stdout = lines.join("\n");
    stdout.push('\n');
    Ok(Output { stdout, stderr: String::new(), code: if holds { 0 } else { 1 } })
}

fn oracle_text(inst: &Instance, rep: &OracleReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "feasible: {}", rep.feasible);
    let _ = writeln!(out, "ir-nonwasteful: {}", rep.ir_nonwasteful);
    let sections = [
        ("stable", &rep.stable),
        ("sosm", &rep.sosm),
        ("m-stable", &rep.m_stable),
        ("weakly-m-stable", &rep.weakly_m_stable),
        ("somsm", &rep.somsm),
        ("group-optimal", &rep.group_optimal),
    ];
    for (name, set) in sections {
        if let Some(set) = set {
            let _ = writeln!(out, "{name}: {}", set.len());
            for mu in set {
                let _ = writeln!(out, "  {}", mu.describe(inst));
            }
        }
    }
    out
}

fn oracle_json(inst: &Instance, rep: &OracleReport) -> String {
    let list = |set: &Option<Vec<Matching>>| {
        set.as_ref().map(|s| s.iter().map(|mu| matching_to_doc(inst, mu)).collect::<Vec<_>>())
    };
    let value = serde_json::json!({
        "feasible": rep.feasible,
        "ir_nonwasteful": rep.ir_nonwasteful,
        "stable": list(&rep.stable),
        "sosm": list(&rep.sosm),
        "m_stable": list(&rep.m_stable),
        "weakly_m_stable": list(&rep.weakly_m_stable),
        "somsm": list(&rep.somsm),
        "group_optimal": list(&rep.group_optimal),
    });
    multiprio::format::to_pretty(&value)
}

fn run_oracle(a: &OracleArgs) -> Result<Output, CliError> {
    let inst = load_instance(&a.instance)?;
    let group = match &a.group {
        Some(text) => Some(with_path(&a.instance, parse_group(&inst, text))?),
        None => None,
    };
    if group.as_ref().is_some_and(Vec::is_empty) {
        return Err(CliError::Usage("--group is empty".into()));
    }
    let rep = oracle::report(&inst, group.as_deref())?;
    Ok(Output::ok(if a.json { oracle_json(&inst, &rep) } else { oracle_text(&inst, &rep) }))
}

fn compare(a: &CompareArgs) -> Result<Output, CliError> {
    let inst = load_instance(&a.instance)?;
    let base = match &a.base {
        Some(p) => load_profile(&inst, p)?,
        None => single_profile(&inst)?.to_vec(),
    };
    let more = load_profile(&inst, &a.more)?;
    let less = load_profile(&inst, &a.less)?;
    let group = with_path(&a.instance, parse_group(&inst, &a.group))?;
    let mode = if a.diagnostic { CheckMode::Diagnostic } else { CheckMode::Enforce };
    let v = match check_responsiveness(&inst, &base, &more, &less, &group, mode) {
        Ok(v) => v,
        Err(ImprovementError::PreconditionFailed(f)) => {
            return Err(CliError::Precondition(format!(
                "more does not more improve base than less: {}",
                f.describe(&inst)
            )))
        }
        Err(e) => return Err(e.into()),
    };

    let mut out = String::new();
    match &v.precondition {
        None => {
            let _ = writeln!(out, "more improves: yes");
        }
        Some(f) => {
            let _ = writeln!(out, "more improves: no ({})", f.describe(&inst));
        }
    }
    let _ = writeln!(out, "outcome more: {}", v.outcome_more.describe(&inst));
    let _ = writeln!(out, "outcome less: {}", v.outcome_less.describe(&inst));
    let inclusion = inst
        .schools()
        .map(|s| format!("{}:{}", inst.school_name(s), if v.m_inclusion[s.0] { "yes" } else { "no" }))
        .collect::<Vec<_>>()
        .join(" ");
    let _ = writeln!(out, "m inclusion: {inclusion}");
    let _ = writeln!(out, "dominated: {}", if v.dominated { "yes" } else { "no" });
    Ok(Output { stdout: out, stderr: String::new(), code: if v.dominated { 1 } else { 0 } })
}

fn generate(a: &GenArgs) -> Result<Output, CliError> {
    let cfg = GenConfig { students: a.students, schools: a.schools, max_capacity: a.max_capacity };
    if cfg.students == 0 || cfg.schools == 0 {
        return Err(GenError::Empty.into());
    }
    if a.oracle_compatible && cfg.students > oracle::MAX_STUDENTS {
        return Err(CliError::Usage(format!(
            "{} students exceed the oracle limit of {}",
            cfg.students,
            oracle::MAX_STUDENTS
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let emit = |text: String| -> Result<Output, CliError> {
        match &a.out {
            Some(path) => {
                write(path, &text)?;
                Ok(Output::default())
            }
            None => Ok(Output::ok(text)),
        }
    };
    match a.mode {
        GenMode::Single => {
            let kind = match a.kind {
                KindArg::Total => PriorityKind::Total,
                KindArg::Weak => PriorityKind::Weak,
                KindArg::Partial => PriorityKind::Partial,
            };
            emit(instance_to_json(&random_instance(&cfg, kind, &mut rng)?))
        }
        GenMode::Multi => emit(instance_to_json(&random_multi_instance(
            &cfg,
            a.max_orders,
            false,
            &mut rng,
        )?)),
        GenMode::ImprovementTriple => {
            let dir = a
                .out_dir
                .as_ref()
                .ok_or_else(|| CliError::Usage("improvement-triple needs --out-dir".into()))?;
            let t = improvement_triple(cfg.students, cfg.schools, a.budget, &mut rng)?;
            let inst = instance_for_triple(&cfg, &t, &mut rng)?;
            fs::create_dir_all(dir)
                .map_err(|source| CliError::Io { path: dir.clone(), source })?;
            write(&dir.join("instance.json"), &instance_to_json(&inst))?;
            write(&dir.join("more.json"), &profile_to_json(&inst, &t.more))?;
            write(&dir.join("less.json"), &profile_to_json(&inst, &t.less))?;
            let group =
                t.group.iter().map(|&i| inst.student_name(i)).collect::<Vec<_>>().join(",");
            write(&dir.join("group.txt"), &format!("{group}\n"))?;
            Ok(Output::default())
        }
    }
}
