//! `rieszmix`: compute and verify mixing coefficients on finite weighted
//! point spaces, in exact rational arithmetic.
//!
//! Exit status: 0 on success, 1 when a verification check is violated,
//! 2 on invalid input.

mod report;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use rieszmix::cond::CondExpectation;
use rieszmix::doc::SpaceDoc;
use rieszmix::mixing;
use rieszmix::space::{EventSet, GroundSpace, LatticeFunction};
use rieszmix::verify::{
    random_instance, run_checks, CheckId, CheckInstance, CheckResult, InstanceSpec, Perturbation,
};

use report::{CoefficientReport, ErrorDoc, ReportDoc};

/// Environment variable bounding the worker threads used by suite runs.
const THREADS_VAR: &str = "RIESZMIX_THREADS";

#[derive(Parser)]
#[command(
    name = "rieszmix",
    version,
    about = "Mixing coefficients and their inequalities on finite weighted point spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CoefficientKind {
    Alpha,
    Phi,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Brute,
    Fast,
}

#[derive(clap::Args, Clone)]
struct GenBudget {
    /// Seed for the deterministic generator.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of points.
    #[arg(long, default_value_t = 8)]
    points: usize,
    /// Number of blocks.
    #[arg(long, default_value_t = 2)]
    blocks: usize,
    /// Cell budget per block for each conditioning partition.
    #[arg(long = "max-cells", default_value_t = 3)]
    max_cells: usize,
    /// Weights are drawn as p/q with p, q in 1..=bound.
    #[arg(long = "weight-bound", default_value_t = 6)]
    weight_bound: u32,
    /// Sample function values are integers in -bound..=bound.
    #[arg(long = "value-bound", default_value_t = 5)]
    value_bound: i64,
}

impl GenBudget {
    fn spec(&self, seed: u64) -> InstanceSpec {
        InstanceSpec {
            seed,
            point_count: self.points,
            block_count: self.blocks,
            max_cells_per_block: self.max_cells,
            weight_denominator_bound: self.weight_bound,
            function_value_bound: self.value_bound,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compute a mixing coefficient between two named partitions.
    Compute {
        /// Space description file (JSON).
        #[arg(long)]
        space: PathBuf,
        /// Which coefficient to compute.
        #[arg(long, value_enum)]
        coefficient: CoefficientKind,
        /// Name of the first conditioning partition (the operator side).
        #[arg(long)]
        u: String,
        /// Name of the second conditioning partition (the event side).
        #[arg(long)]
        v: String,
        /// Algorithm for alpha; phi always enumerates events.
        #[arg(long, value_enum, default_value_t = MethodArg::Brute)]
        method: MethodArg,
        /// Write the report here instead of stdout (atomic).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify the inequality suite on a space file or random instances.
    Verify {
        /// Space description file (JSON); requires --u and --v.
        #[arg(long, conflicts_with = "random")]
        space: Option<PathBuf>,
        /// Name of the first conditioning partition.
        #[arg(long, requires = "space")]
        u: Option<String>,
        /// Name of the second conditioning partition.
        #[arg(long, requires = "space")]
        v: Option<String>,
        /// Verify seeded random instances instead of a file.
        #[arg(long)]
        random: bool,
        /// Number of random instances.
        #[arg(long, default_value_t = 20)]
        instances: u64,
        #[command(flatten)]
        budget: GenBudget,
        /// Comma-separated check names (default: every check).
        #[arg(long)]
        theorems: Option<String>,
        /// Self-test hook: shift every alpha by +1 so the harness must
        /// report violations.
        #[arg(long, hide = true)]
        perturb_alpha: bool,
        /// Write the report here instead of stdout (atomic).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a space file from a seeded random instance.
    Gen {
        #[command(flatten)]
        budget: GenBudget,
        /// Output path for the generated space file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the statements behind the verification checks.
    Explain {
        /// A single check name; omit to list all.
        check: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    let command_echo = std::env::args().skip(1).collect::<Vec<_>>().join(" ");
    match run(cli.command, &command_echo) {
        Ok(code) => code,
        Err(err) => {
            let doc = ReportDoc::error(&command_echo, ErrorDoc::from(&err));
            println!("{}", doc.to_json());
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn configure_threads() {
    if let Ok(value) = std::env::var(THREADS_VAR) {
        if let Ok(threads) = value.parse::<usize>() {
            if threads >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
        }
    }
}

#[derive(Debug)]
enum CliError {
    Core(rieszmix::Error),
    Io { path: PathBuf, source: std::io::Error },
    Json { path: PathBuf, source: serde_json::Error },
    Usage(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Json { path, source } => {
                write!(f, "{}: invalid JSON: {source}", path.display())
            }
            CliError::Usage(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<rieszmix::Error> for CliError {
    fn from(e: rieszmix::Error) -> CliError {
        CliError::Core(e)
    }
}

fn run(command: Command, echo: &str) -> Result<ExitCode, CliError> {
    match command {
        Command::Compute {
            space,
            coefficient,
            u,
            v,
            method,
            out,
        } => cmd_compute(&space, coefficient, &u, &v, method, out.as_deref(), echo),
        Command::Verify {
            space,
            u,
            v,
            random,
            instances,
            budget,
            theorems,
            perturb_alpha,
            out,
        } => {
            let filter = parse_filter(theorems.as_deref())?;
            let perturb = if perturb_alpha {
                Perturbation::alpha_plus_one()
            } else {
                Perturbation::none()
            };
            match (space, random) {
                (Some(path), false) => {
                    let u = u.ok_or_else(|| {
                        CliError::Usage("--space verification needs --u".to_owned())
                    })?;
                    let v = v.ok_or_else(|| {
                        CliError::Usage("--space verification needs --v".to_owned())
                    })?;
                    cmd_verify_file(&path, &u, &v, &filter, &perturb, out.as_deref(), echo)
                }
                (None, true) => {
                    cmd_verify_random(instances, &budget, &filter, &perturb, out.as_deref(), echo)
                }
                _ => Err(CliError::Usage(
                    "verify needs either --space FILE --u NAME --v NAME or --random".to_owned(),
                )),
            }
        }
        Command::Gen { budget, out } => cmd_gen(&budget, &out),
        Command::Explain { check } => cmd_explain(check.as_deref()),
    }
}

fn parse_filter(theorems: Option<&str>) -> Result<BTreeSet<CheckId>, CliError> {
    match theorems {
        None => Ok(CheckId::ALL.into_iter().collect()),
        Some(list) => list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|name| CheckId::from_name(name).map_err(CliError::from))
            .collect(),
    }
}

fn load_doc(path: &Path) -> Result<SpaceDoc, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| CliError::Json {
        path: path.to_owned(),
        source,
    })
}

fn emit(doc: &ReportDoc, out: Option<&Path>) -> Result<(), CliError> {
    let text = doc.to_json();
    match out {
        None => {
            println!("{text}");
            Ok(())
        }
        Some(path) => write_atomic(path, &text),
    }
}

/// Write-then-rename so readers never observe a partial report.
fn write_atomic(path: &Path, text: &str) -> Result<(), CliError> {
    let io_err = |source| CliError::Io {
        path: path.to_owned(),
        source,
    };
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, text).map_err(io_err)?;
    std::fs::rename(&tmp, path).map_err(io_err)
}

fn cmd_compute(
    path: &Path,
    coefficient: CoefficientKind,
    u_name: &str,
    v_name: &str,
    method: MethodArg,
    out: Option<&Path>,
    echo: &str,
) -> Result<ExitCode, CliError> {
    let started = Instant::now();
    let doc = load_doc(path)?;
    let space = doc.build_space()?;
    let t = CondExpectation::over_blocks(&space);
    let u = CondExpectation::new(doc.partition(&space, u_name, true)?);
    let v = CondExpectation::new(doc.partition(&space, v_name, true)?);
    let report = match (coefficient, method) {
        (CoefficientKind::Alpha, MethodArg::Brute) => mixing::alpha_brute(&t, &u, &v)?,
        (CoefficientKind::Alpha, MethodArg::Fast) => mixing::alpha_fast(&t, &u, &v)?,
        (CoefficientKind::Phi, _) => mixing::phi(&t, &u, &v)?,
    };
    let kind = match coefficient {
        CoefficientKind::Alpha => "alpha",
        CoefficientKind::Phi => "phi",
    };
    let coefficient = CoefficientReport::from_mixing(kind, u_name, v_name, &report);
    let doc = ReportDoc::ok(echo)
        .with_coefficient(coefficient)
        .with_timing(started.elapsed().as_millis());
    emit(&doc, out)?;
    Ok(ExitCode::SUCCESS)
}

/// Sample functions for file-based verification: the file's own functions
/// plus indicators of the conditioning cells, so a bare space still gets a
/// meaningful battery.
fn fixture_functions(
    doc: &SpaceDoc,
    space: &Arc<GroundSpace>,
    u: &CondExpectation,
    v: &CondExpectation,
) -> Result<Vec<(String, LatticeFunction)>, CliError> {
    let mut functions: Vec<(String, LatticeFunction)> = doc
        .function_names()
        .map(|name| Ok((name.to_owned(), doc.function(space, name)?)))
        .collect::<Result<_, rieszmix::Error>>()?;
    for (prefix, op) in [("__u", u), ("__v", v)] {
        for (i, cell) in op.partition().cells().iter().enumerate().take(8) {
            let event = EventSet::from_indices(space, cell.iter().copied());
            functions.push((format!("{prefix}{i}"), event.indicator()));
        }
    }
    Ok(functions)
}

fn cmd_verify_file(
    path: &Path,
    u_name: &str,
    v_name: &str,
    filter: &BTreeSet<CheckId>,
    perturb: &Perturbation,
    out: Option<&Path>,
    echo: &str,
) -> Result<ExitCode, CliError> {
    let started = Instant::now();
    let doc = load_doc(path)?;
    let space = doc.build_space()?;
    let u = CondExpectation::new(doc.partition(&space, u_name, true)?);
    let v = CondExpectation::new(doc.partition(&space, v_name, true)?);
    let functions = fixture_functions(&doc, &space, &u, &v)?;
    let inst = CheckInstance::assemble(
        &space,
        u.partition().clone(),
        v.partition().clone(),
        functions,
    )?;
    let (results, _) = run_checks(&inst, 0, filter, perturb)?;
    finish_verify(results_status(&results), echo, Some(results), None, started, out)
}

fn cmd_verify_random(
    instances: u64,
    budget: &GenBudget,
    filter: &BTreeSet<CheckId>,
    perturb: &Perturbation,
    out: Option<&Path>,
    echo: &str,
) -> Result<ExitCode, CliError> {
    let started = Instant::now();
    let specs: Vec<InstanceSpec> = (0..instances)
        .map(|i| budget.spec(budget.seed.wrapping_add(i)))
        .collect();
    let report = rieszmix::verify::run_suite(&specs, filter, perturb)?;
    let ok = report.all_hold();
    finish_verify(ok, echo, None, Some(report), started, out)
}

fn results_status(results: &[CheckResult]) -> bool {
    results.iter().all(|r| r.holds)
}

fn finish_verify(
    ok: bool,
    echo: &str,
    checks: Option<Vec<CheckResult>>,
    suite: Option<rieszmix::verify::SuiteReport>,
    started: Instant,
    out: Option<&Path>,
) -> Result<ExitCode, CliError> {
    let mut doc = if ok {
        ReportDoc::ok(echo)
    } else {
        ReportDoc::violation(echo)
    };
    if let Some(checks) = checks {
        doc = doc.with_checks(checks);
    }
    if let Some(suite) = suite {
        doc = doc.with_suite(suite);
    }
    doc = doc.with_timing(started.elapsed().as_millis());
    emit(&doc, out)?;
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_gen(budget: &GenBudget, out: &Path) -> Result<ExitCode, CliError> {
    let inst = random_instance(&budget.spec(budget.seed))?;
    let mut text = serde_json::to_string_pretty(&inst.doc).expect("doc serializes");
    text.push('\n');
    write_atomic(out, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_explain(check: Option<&str>) -> Result<ExitCode, CliError> {
    let selected: Vec<CheckId> = match check {
        None => CheckId::ALL.to_vec(),
        Some(name) => vec![CheckId::from_name(name)?],
    };
    for check in selected {
        println!("{}: {}", check.name(), check.describe());
    }
    Ok(ExitCode::SUCCESS)
}
