//! Command-line pipeline for constraint-driven event log abstraction.
//!
//! Exit codes: 0 success, 1 configuration or parse failure, 2 infeasible
//! constraint set (the original log is echoed as the result), 3 timeout
//! before any grouping was found.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use logabs_core::{
    abstract_log, default_names, dfg_candidates, diagnose, exhaustive_candidates, load_log,
    merge_exclusive, parse_constraints_file, quality_report, solve_exact, write_log,
    AbstractionStrategy, Beam, Bounds, CandidateSet, ClassSet, ConstraintSet, CoverProblem, Dfg,
    EventClass, EventLog, Group, Grouping, LogFormat, SolveError, SolveOutcome, SolveResult,
};

const EXIT_CONFIG: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_TIMEOUT: u8 = 3;

#[derive(Parser)]
#[command(
    name = "logabs",
    about = "Abstract low-level event logs into high-level activity logs under user constraints",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for candidate checking and trace rewriting
    /// (0 = machine parallelism). Results are identical for any value.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline and write the abstracted log plus reports.
    Abstract(AbstractArgs),
    /// Compute candidate groups and emit them as JSONL.
    Candidates(CandidatesArgs),
    /// Export the directly-follows graph as DOT.
    Dfg(DfgArgs),
    /// Score an abstraction: size and edge reduction, silhouette.
    Metrics(MetricsArgs),
    /// Explain why no feasible grouping exists.
    Diagnose(CandidatesArgs),
}

#[derive(Args, Clone)]
struct LogArgs {
    /// Input event log.
    #[arg(long)]
    log: PathBuf,
    /// Input format; inferred from the extension when omitted.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Column or key holding the case identifier.
    #[arg(long, default_value = "case")]
    case_col: String,
    /// Column or key holding the event class.
    #[arg(long, default_value = "class")]
    class_col: String,
    /// Column or key holding the timestamp (ISO-8601 or epoch millis).
    #[arg(long, default_value = "time")]
    time_col: String,
}

#[derive(Args, Clone)]
struct SearchArgs {
    /// Constraint document; omitted means unconstrained.
    #[arg(long)]
    constraints: Option<PathBuf>,
    /// Candidate computation engine.
    #[arg(long, value_enum, default_value_t = EngineArg::Exh)]
    engine: EngineArg,
    /// Beam width for `--engine dfg-k` (default: 5 per event class).
    #[arg(long)]
    beam: Option<usize>,
    /// Candidate-search time budget in seconds.
    #[arg(long, default_value_t = 18_000.0)]
    timeout: f64,
}

#[derive(Args)]
struct AbstractArgs {
    #[command(flatten)]
    log: LogArgs,
    #[command(flatten)]
    search: SearchArgs,
    /// Instance boundary strategy for the abstracted trace.
    #[arg(long, value_enum, default_value_t = StrategyArg::Complete)]
    strategy: StrategyArg,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Attribute whose shared value prefixes default activity names.
    #[arg(long)]
    name_attr: Option<String>,
    /// Skip candidate computation and solve over this JSONL candidate set.
    #[arg(long)]
    from_candidates: Option<PathBuf>,
}

#[derive(Args)]
struct CandidatesArgs {
    #[command(flatten)]
    log: LogArgs,
    #[command(flatten)]
    search: SearchArgs,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DfgArgs {
    #[command(flatten)]
    log: LogArgs,
    /// Keep only this fraction of the most frequent edges, in (0, 1].
    #[arg(long)]
    edge_filter: Option<f64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MetricsArgs {
    #[command(flatten)]
    log: LogArgs,
    /// Grouping sidecar JSON produced by `abstract`.
    #[arg(long)]
    grouping: PathBuf,
    /// Abstracted log to compare against; recomputed when omitted.
    #[arg(long)]
    abstracted: Option<PathBuf>,
    /// Strategy used when recomputing the abstraction.
    #[arg(long, value_enum, default_value_t = StrategyArg::Complete)]
    strategy: StrategyArg,
    /// Constraint document (drives the instance splitting rule).
    #[arg(long)]
    constraints: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Jsonl,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum EngineArg {
    /// Exhaustive candidate enumeration.
    Exh,
    /// DFG-guided search, unlimited beam.
    Dfg,
    /// DFG-guided search with a beam width.
    DfgK,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    /// Keep one completion event per activity instance.
    Complete,
    /// Keep start and completion events per multi-event instance.
    StartComplete,
}

impl From<StrategyArg> for AbstractionStrategy {
    fn from(value: StrategyArg) -> Self {
        match value {
            StrategyArg::Complete => AbstractionStrategy::CompletionOnly,
            StrategyArg::StartComplete => AbstractionStrategy::StartAndComplete,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(err) = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
    {
        eprintln!("error: {err}");
        return ExitCode::from(EXIT_CONFIG);
    }
    let outcome = match cli.command {
        Command::Abstract(args) => cmd_abstract(args),
        Command::Candidates(args) => cmd_candidates(args),
        Command::Dfg(args) => cmd_dfg(args),
        Command::Metrics(args) => cmd_metrics(args),
        Command::Diagnose(args) => cmd_diagnose(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}

fn load_input(args: &LogArgs) -> Result<(EventLog, LogFormat)> {
    let format = match args.format {
        Some(FormatArg::Csv) => LogFormat::Csv,
        Some(FormatArg::Jsonl) => LogFormat::Jsonl,
        None => LogFormat::from_path(&args.log),
    };
    let columns = logabs_core::ColumnMap {
        case: args.case_col.clone(),
        class: args.class_col.clone(),
        time: args.time_col.clone(),
    };
    let log = load_log(&args.log, format, &columns)
        .with_context(|| format!("loading {}", args.log.display()))?;
    Ok((log, format))
}

fn load_constraints(path: &Option<PathBuf>, log: &EventLog) -> Result<ConstraintSet> {
    let rs = match path {
        None => ConstraintSet::empty(),
        Some(path) => {
            parse_constraints_file(path).with_context(|| format!("in {}", path.display()))?
        }
    };
    rs.validate_for_log(log)?;
    Ok(rs)
}

fn search_timeout(args: &SearchArgs) -> Result<Duration> {
    if args.timeout <= 0.0 {
        bail!("--timeout must be positive");
    }
    Ok(Duration::from_secs_f64(args.timeout))
}

fn compute_candidates(
    log: &EventLog,
    rs: &ConstraintSet,
    args: &SearchArgs,
) -> Result<CandidateSet> {
    let timeout = search_timeout(args)?;
    let raw = match args.engine {
        EngineArg::Exh => exhaustive_candidates(log, rs, timeout)?,
        EngineArg::Dfg => dfg_candidates(log, rs, Beam::Unlimited, timeout)?,
        EngineArg::DfgK => {
            let beam = match args.beam {
                Some(k) if k >= 1 => Beam::Width(k),
                Some(_) => bail!("--beam must be at least 1"),
                None => Beam::default_for(log),
            };
            dfg_candidates(log, rs, beam, timeout)?
        }
    };
    if raw.truncated {
        eprintln!("note: candidate search timed out; continuing with candidates found so far");
    }
    Ok(merge_exclusive(log, rs, &raw)?)
}

fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn grouping_sidecar(
    grouping: &Grouping,
    names: &BTreeMap<ClassSet, String>,
    proven: bool,
) -> serde_json::Value {
    let groups: Vec<serde_json::Value> = grouping
        .groups()
        .iter()
        .map(|g| {
            serde_json::json!({
                "classes": g.classes().iter().map(EventClass::name).collect::<Vec<_>>(),
                "name": names.get(g.classes()).cloned().unwrap_or_else(|| g.signature()),
            })
        })
        .collect();
    serde_json::json!({
        "objective": grouping.objective(),
        "proven": proven,
        "groups": groups,
    })
}

fn pretty(value: &serde_json::Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    text
}

fn cmd_abstract(args: AbstractArgs) -> Result<u8> {
    let (log, format) = load_input(&args.log)?;
    let rs = load_constraints(&args.search.constraints, &log)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let result_log_path = args.out.join(format!("abstracted.{}", format.extension()));

    Dfg::from_log(&log).write_dot(&args.out.join("original.dot"), None)?;

    let outcome = if let Some(path) = &args.from_candidates {
        let candidates = read_candidates_jsonl(path)?;
        let problem = CoverProblem::new(
            candidates,
            log.classes().clone(),
            Bounds::from_constraints(&rs),
        )?;
        solve_problem(&problem, &args.search)?
    } else {
        let candidates = compute_candidates(&log, &rs, &args.search)?;
        match CoverProblem::from_candidates(&candidates, &log, Bounds::from_constraints(&rs)) {
            Ok(problem) => match solve_problem(&problem, &args.search)? {
                SolveResult::Infeasible(_) => {
                    // enrich the basic report with search-time evidence
                    SolveResult::Infeasible(diagnose(&problem, &candidates.violations))
                }
                solved => solved,
            },
            Err(SolveError::NoCandidates) => SolveResult::Infeasible(diagnose(
                &empty_cover_placeholder(&log)?,
                &candidates.violations,
            )),
            Err(err) => return Err(err.into()),
        }
    };

    match outcome {
        SolveResult::Solved(SolveOutcome { grouping, proven }) => {
            let names = default_names(&grouping, &log, args.name_attr.as_deref());
            let abstracted = abstract_log(
                &log,
                &grouping,
                args.strategy.into(),
                Some(&names),
                rs.split_rule(),
            )?;
            write_log(&abstracted, &result_log_path, format)?;
            write_text(
                Some(&args.out.join("activity_names.json")),
                &pretty(&grouping_sidecar(&grouping, &names, proven)),
            )?;
            let report = quality_report(&grouping, &log, &abstracted);
            write_text(
                Some(&args.out.join("quality_report.json")),
                &pretty(&serde_json::to_value(&report)?),
            )?;
            Dfg::from_log(&abstracted).write_dot(&args.out.join("abstracted.dot"), None)?;
            if !proven {
                eprintln!(
                    "note: solver hit the time limit; grouping is the best found, not proven optimal"
                );
            }
            Ok(0)
        }
        SolveResult::Infeasible(report) => {
            // no feasible grouping: the pipeline result is the input log
            write_log(&log, &result_log_path, format)?;
            write_text(
                Some(&args.out.join("infeasibility_report.json")),
                &pretty(&serde_json::to_value(&report)?),
            )?;
            eprintln!("no feasible grouping: {report}");
            Ok(EXIT_INFEASIBLE)
        }
    }
}

/// A placeholder problem that marks every class uncovered, for reports when
/// not even singletons survived the search.
fn empty_cover_placeholder(log: &EventLog) -> Result<CoverProblem> {
    let ghost: ClassSet = [EventClass::from("__none__")].into();
    Ok(CoverProblem::new(
        vec![(ghost, f64::INFINITY)],
        log.classes().clone(),
        Bounds::default(),
    )?)
}

fn solve_problem(problem: &CoverProblem, search: &SearchArgs) -> Result<SolveResult> {
    match solve_exact(problem, search_timeout(search)?) {
        Ok(result) => Ok(result),
        Err(SolveError::TimeoutWithoutIncumbent) => {
            eprintln!("error: time limit expired before any grouping was found");
            std::process::exit(EXIT_TIMEOUT as i32);
        }
        Err(err) => Err(err.into()),
    }
}

fn cmd_candidates(args: CandidatesArgs) -> Result<u8> {
    let (log, _) = load_input(&args.log)?;
    let rs = load_constraints(&args.search.constraints, &log)?;
    let candidates = compute_candidates(&log, &rs, &args.search)?;
    write_text(args.out.as_deref(), &candidates.to_jsonl())?;
    Ok(0)
}

fn read_candidates_jsonl(path: &Path) -> Result<Vec<(ClassSet, f64)>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value =
            serde_json::from_str(line).with_context(|| format!("candidate line {}", i + 1))?;
        let classes: ClassSet = value["classes"]
            .as_array()
            .ok_or_else(|| anyhow!("candidate line {}: missing classes", i + 1))?
            .iter()
            .filter_map(|v| v.as_str())
            .map(EventClass::from)
            .collect();
        let distance = value["distance"]
            .as_f64()
            .ok_or_else(|| anyhow!("candidate line {}: missing distance", i + 1))?;
        out.push((classes, distance));
    }
    Ok(out)
}

fn cmd_dfg(args: DfgArgs) -> Result<u8> {
    if let Some(f) = args.edge_filter {
        if !(f > 0.0 && f <= 1.0) {
            bail!("--edge-filter must lie in (0, 1]");
        }
    }
    let (log, _) = load_input(&args.log)?;
    let dot = Dfg::from_log(&log).to_dot(args.edge_filter);
    write_text(args.out.as_deref(), &dot)?;
    Ok(0)
}

fn cmd_metrics(args: MetricsArgs) -> Result<u8> {
    let (log, _) = load_input(&args.log)?;
    let rs = load_constraints(&args.constraints, &log)?;
    let grouping = read_grouping_sidecar(&args.grouping)?;
    let abstracted = match &args.abstracted {
        Some(path) => {
            let format = LogFormat::from_path(path);
            let columns = logabs_core::ColumnMap::default();
            load_log(path, format, &columns)
                .with_context(|| format!("loading {}", path.display()))?
        }
        None => abstract_log(&log, &grouping, args.strategy.into(), None, rs.split_rule())?,
    };
    let report = quality_report(&grouping, &log, &abstracted);
    write_text(
        args.out.as_deref(),
        &pretty(&serde_json::to_value(&report)?),
    )?;
    Ok(0)
}

fn read_grouping_sidecar(path: &Path) -> Result<Grouping> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let groups = value["groups"]
        .as_array()
        .ok_or_else(|| anyhow!("sidecar has no groups array"))?;
    let mut parsed = Vec::new();
    for entry in groups {
        let classes: ClassSet = entry["classes"]
            .as_array()
            .ok_or_else(|| anyhow!("group without classes"))?
            .iter()
            .filter_map(|v| v.as_str())
            .map(EventClass::from)
            .collect();
        parsed.push(Group::new(classes).map_err(|e| anyhow!("{e}"))?);
    }
    let objective = value["objective"].as_f64().unwrap_or(0.0);
    Ok(Grouping::new(parsed, objective))
}

fn cmd_diagnose(args: CandidatesArgs) -> Result<u8> {
    let (log, _) = load_input(&args.log)?;
    let rs = load_constraints(&args.search.constraints, &log)?;
    let candidates = compute_candidates(&log, &rs, &args.search)?;
    let (feasible, report) =
        match CoverProblem::from_candidates(&candidates, &log, Bounds::from_constraints(&rs)) {
            Ok(problem) => match solve_problem(&problem, &args.search)? {
                SolveResult::Solved(_) => (true, diagnose(&problem, &candidates.violations)),
                SolveResult::Infeasible(_) => (false, diagnose(&problem, &candidates.violations)),
            },
            Err(SolveError::NoCandidates) => (
                false,
                diagnose(&empty_cover_placeholder(&log)?, &candidates.violations),
            ),
            Err(err) => return Err(err.into()),
        };
    let mut value = serde_json::to_value(&report)?;
    value["feasible"] = serde_json::Value::Bool(feasible);
    write_text(args.out.as_deref(), &pretty(&value))?;
    Ok(if feasible { 0 } else { EXIT_INFEASIBLE })
}
