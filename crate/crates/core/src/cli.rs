//! Command-line front end. Every JSON report is wrapped as
//! `{"meta": {"command", "version", "seed", "config"}, "report": ...}` and
//! contains nothing that depends on wall-clock time or the worker count.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use rectmatch::concentration::{
    borel_report, bounded_difference_check, fekete_report, tail_vs_bound, write_fekete_csv, ConcentrationReport,
};
use rectmatch::counterexample::markov_gap_report;
use rectmatch::geometry::{generate_instance, read_instance_csv, validate_matching, write_instance_csv, PointModel};
use rectmatch::process::{
    alpha, expectation_bounds, require_valid, stationary, ChainSpec, ChainValidation, ExpectationBounds,
    DEFAULT_CONVERGENCE_CAP, DEFAULT_STATIONARY_TOL,
};
use rectmatch::solvers::{solve, MatchingRecord, SolveLimits, SolveOutcome, SolverChoice};
use rectmatch::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_BUDGET: i32 = 2;
pub const EXIT_CHAIN: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "rectmatch", version, about = "Rectangle matchings of random bichromatic point sets")]
struct Cli {
    /// Worker threads for trial loops; 0 uses every core. Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a random instance as CSV.
    Gen(GenArgs),
    /// Solve an instance file.
    Solve(SolveArgs),
    /// Analyze a chain spec: validation, stationary distribution, expectation bounds.
    Chain(ChainArgs),
    /// Exact and sampled probabilities of the alternating-chain event.
    Counterexample(CounterexampleArgs),
    /// Concentration checks for the matched fraction.
    Concentration(ConcentrationArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum ModelArg {
    Uniform,
    GridX,
}

impl From<ModelArg> for PointModel {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Uniform => PointModel::UniformSquare,
            ModelArg::GridX => PointModel::GridX,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum SolverArg {
    Exact,
    Bruteforce,
    Greedy,
}

impl From<SolverArg> for SolverChoice {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Exact => SolverChoice::Exact,
            SolverArg::Bruteforce => SolverChoice::Bruteforce,
            SolverArg::Greedy => SolverChoice::Greedy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum CheckArg {
    BoundedDiff,
    Tail,
    Fekete,
    Borel,
}

#[derive(Debug, Args, Serialize)]
struct LimitArgs {
    /// Branch-and-bound node budget per solve.
    #[arg(long, default_value_t = 100_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    limits_nodes: u64,
    /// Time budget per solve, in seconds.
    #[arg(long, default_value_t = 600, value_parser = clap::value_parser!(u64).range(1..))]
    limits_seconds: u64,
}

impl LimitArgs {
    fn limits(&self) -> SolveLimits {
        SolveLimits { max_nodes: self.limits_nodes, time_budget: Duration::from_secs(self.limits_seconds) }
    }
}

#[derive(Debug, Args, Serialize)]
struct GenArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = ModelArg::Uniform)]
    model: ModelArg,
    /// Output CSV path; standard output if absent.
    #[arg(long)]
    #[serde(skip)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct SolveArgs {
    /// Instance CSV.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = SolverArg::Exact)]
    solver: SolverArg,
    #[command(flatten)]
    limits: LimitArgs,
    #[arg(long)]
    #[serde(skip)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct ChainArgs {
    /// Chain-spec JSON.
    #[arg(long, alias = "chain")]
    input: PathBuf,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    /// Largest power tried when searching for the convergence index.
    #[arg(long, default_value_t = DEFAULT_CONVERGENCE_CAP)]
    cap: usize,
    #[arg(long)]
    #[serde(skip)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct CounterexampleArgs {
    #[arg(long, value_parser = clap::value_parser!(u32).range(3..))]
    t: u32,
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    #[serde(skip)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct ConcentrationArgs {
    #[arg(long, value_enum)]
    check: CheckArg,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    n: Option<u64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    /// Required by every check except `borel`.
    #[arg(long)]
    seed: Option<u64>,
    /// Position moves and recolorings per instance (bounded-diff).
    #[arg(long, default_value_t = 3)]
    perturbations: usize,
    /// Trials of the independent run that fixes the reference mean (tail); defaults to 10x trials.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pilot_trials: Option<u64>,
    /// Instance sizes for the superadditivity table (fekete), comma-separated.
    #[arg(long, value_delimiter = ',')]
    ns: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    n0: u64,
    #[arg(long, value_enum, default_value_t = SolverArg::Exact)]
    solver: SolverArg,
    #[arg(long, value_enum, default_value_t = ModelArg::Uniform)]
    model: ModelArg,
    #[command(flatten)]
    limits: LimitArgs,
    /// Chain spec whose stationary reward rate is reported with `β`.
    #[arg(long)]
    chain: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    output: Option<PathBuf>,
    /// Where to write the fekete table as CSV.
    #[arg(long)]
    #[serde(skip)]
    csv: Option<PathBuf>,
}

#[derive(Serialize)]
struct Meta<'a, C: Serialize> {
    command: &'a str,
    version: &'a str,
    seed: Option<u64>,
    config: &'a C,
}

#[derive(Serialize)]
struct Envelope<'a, C: Serialize, R: Serialize> {
    meta: Meta<'a, C>,
    report: R,
}

#[derive(Serialize)]
struct SolveReport {
    #[serde(flatten)]
    record: MatchingRecord,
    solver: SolverArg,
    valid: bool,
}

#[derive(Serialize)]
struct ChainReport {
    states: Vec<String>,
    validation: ChainValidation,
    stationary: Vec<f64>,
    /// `max |s Q - s|`.
    stationary_residual: f64,
    alpha: f64,
    bounds: ExpectationBounds,
}

enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Lib(Error::Io(e))
    }
}

type CliResult = Result<i32, Failure>;

/// Parses `args` (program name first) and runs the command; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.workers).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return EXIT_INPUT;
        }
    };
    match pool.install(|| dispatch(&cli.command)) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_INPUT
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            if e.is_chain_validation() {
                EXIT_CHAIN
            } else if matches!(e, Error::BudgetExceeded { .. }) {
                EXIT_BUDGET
            } else {
                EXIT_INPUT
            }
        }
    }
}

fn dispatch(cmd: &Command) -> CliResult {
    match cmd {
        Command::Gen(a) => cmd_gen(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Chain(a) => cmd_chain(a),
        Command::Counterexample(a) => cmd_counterexample(a),
        Command::Concentration(a) => cmd_concentration(a),
    }
}

fn open_output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit<C: Serialize, R: Serialize>(
    command: &str,
    seed: Option<u64>,
    config: &C,
    report: R,
    output: Option<&Path>,
) -> Result<(), Failure> {
    let env = Envelope { meta: Meta { command, version: env!("CARGO_PKG_VERSION"), seed, config }, report };
    let mut out = open_output(output)?;
    serde_json::to_writer_pretty(&mut out, &env).map_err(Error::from)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn cmd_gen(a: &GenArgs) -> CliResult {
    let inst = generate_instance(a.n as usize, a.seed, a.model.into())?;
    let mut out = open_output(a.output.as_deref())?;
    write_instance_csv(&inst, &mut out)?;
    out.flush()?;
    drop(out);
    if let Some(p) = &a.output {
        println!("wrote {} (n = {}, seed = {})", p.display(), a.n, a.seed);
    }
    Ok(EXIT_OK)
}

fn cmd_solve(a: &SolveArgs) -> CliResult {
    let inst = read_instance_csv(BufReader::new(File::open(&a.input)?))?;
    let (outcome, code) = match solve(&inst, a.solver.into(), &a.limits.limits()) {
        Ok(o) => (o, EXIT_OK),
        Err(Error::BudgetExceeded { best, nodes }) => {
            eprintln!("error: search budget exceeded after {nodes} nodes; reporting the incumbent");
            (SolveOutcome { matching: best, optimal: false, nodes_explored: nodes }, EXIT_BUDGET)
        }
        Err(e) => return Err(e.into()),
    };
    let valid = validate_matching(&inst, &outcome.matching)?.valid;
    let report = SolveReport { record: MatchingRecord::new(&inst, &outcome), solver: a.solver, valid };
    emit("solve", None, a, report, a.output.as_deref())?;
    Ok(code)
}

fn load_chain(path: &Path) -> Result<ChainSpec, Failure> {
    let text = std::fs::read_to_string(path)?;
    Ok(ChainSpec::from_json(&text).map_err(|e| match e {
        // A file that is not a chain spec at all is an input error, not a validation failure.
        Error::Json(j) => Error::Parse { line: j.line() as u64, message: j.to_string() },
        other => other,
    })?)
}

fn cmd_chain(a: &ChainArgs) -> CliResult {
    let c = load_chain(&a.input)?;
    let validation = require_valid(&c)?;
    let s = stationary(&c, DEFAULT_STATIONARY_TOL)?;
    let residual = (&s * c.q() - &s).amax();
    let report = ChainReport {
        states: c.labels().to_vec(),
        validation,
        stationary: s.iter().copied().collect(),
        stationary_residual: residual,
        alpha: alpha(&c)?,
        bounds: expectation_bounds(&c, a.epsilon, a.n as usize, a.cap)?,
    };
    emit("chain", None, a, report, a.output.as_deref())?;
    Ok(EXIT_OK)
}

fn cmd_counterexample(a: &CounterexampleArgs) -> CliResult {
    let report = markov_gap_report(a.t, a.trials, a.seed)?;
    emit("counterexample", Some(a.seed), a, report, a.output.as_deref())?;
    Ok(EXIT_OK)
}

fn need<T: Copy>(v: Option<T>, flag: &str, check: CheckArg) -> Result<T, Failure> {
    v.ok_or_else(|| {
        let name = check.to_possible_value().map(|p| p.get_name().to_owned()).unwrap_or_default();
        Failure::Usage(format!("--check {name} requires --{flag}"))
    })
}

fn cmd_concentration(a: &ConcentrationArgs) -> CliResult {
    let limits = a.limits.limits();
    let solver: SolverChoice = a.solver.into();
    let model: PointModel = a.model.into();
    let n = a.n.map(|n| n as usize);
    let mut report = ConcentrationReport::default();
    match a.check {
        CheckArg::BoundedDiff => {
            let n = need(n, "n", a.check)?;
            let seed = need(a.seed, "seed", a.check)?;
            report.bounded_differences =
                Some(bounded_difference_check(n, a.trials, a.perturbations, seed, solver, model, &limits)?);
        }
        CheckArg::Tail => {
            let n = need(n, "n", a.check)?;
            let eps = need(a.epsilon, "epsilon", a.check)?;
            let seed = need(a.seed, "seed", a.check)?;
            let pilot = a.pilot_trials.unwrap_or(a.trials.saturating_mul(10));
            report.tail = Some(tail_vs_bound(n, eps, a.trials, pilot, seed, solver, model, &limits)?);
        }
        CheckArg::Fekete => {
            if a.ns.is_empty() {
                return Err(Failure::Usage("--check fekete requires --ns".into()));
            }
            if !solver.is_exact() {
                return Err(Failure::Usage("--check fekete uses maximum matchings".into()));
            }
            let seed = need(a.seed, "seed", a.check)?;
            let table = fekete_report(&a.ns, a.trials, seed, model, &limits)?;
            if let Some(p) = &a.csv {
                write_fekete_csv(&table, BufWriter::new(File::create(p)?))?;
            }
            report.fekete = Some(table);
        }
        CheckArg::Borel => {
            let eps = need(a.epsilon, "epsilon", a.check)?;
            report.borel = Some(borel_report(eps, a.n0)?);
        }
    }
    report = report.with_parameters(n, a.epsilon)?;
    if let Some(path) = &a.chain {
        let c = load_chain(path)?;
        report = report.with_alpha(alpha(&c)?);
    }
    emit("concentration", a.seed, a, report, a.output.as_deref())?;
    Ok(EXIT_OK)
}
