//! Command-line front end.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::certificates::{
    certify_from_preliminary, certify_standard_ellipsoid, certify_terminal, is_pow2_checkpoint,
    residual_bound_from_gap, CertificateError, Semicertificate,
};
use crate::generate;
use crate::oracles::{Problem, ProblemError};
use crate::solver::{
    run_with, AlphaSchedule, HistoryRecord, RunOutput, Solver, SolverError, StorageMode, StrategyConfig,
    Termination, Variant,
};

pub const CSV_HEADER: &str = "k,variant,productive,f_value,sliding_gap,cert_gap,R_k,avrad,Gamma_k,wall_time_us";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Problem(#[from] ProblemError),
    #[error("{0}")]
    Solver(#[from] SolverError),
    #[error("{0}")]
    Certificate(#[from] CertificateError),
    #[error("{path}: {source}")]
    Output { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Problem(_) | CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "subell", version, about = "Subgradient ellipsoid methods with accuracy certificates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one method and write its convergence trace
    Solve(SolveArgs),
    /// Run one method and build certificates at checkpoints
    Certify(CertifyArgs),
    /// Run several methods on the same problem side by side
    Compare(CompareArgs),
    /// Write a random problem instance with a known solution
    Generate(GenerateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Problem file
    #[arg(long, env = "SUBELL_PROBLEM")]
    pub problem: PathBuf,
    #[arg(long, env = "SUBELL_VARIANT", default_value = "subgrad-ellipsoid")]
    pub variant: Variant,
    /// Iteration cap
    #[arg(long, env = "SUBELL_ITERS", default_value_t = 1000)]
    pub iters: usize,
    /// const:K or decay
    #[arg(long, env = "SUBELL_SCHEDULE", default_value = "decay")]
    pub schedule: AlphaSchedule,
    /// Target residual; sets the termination threshold to εr/(ε+V)
    #[arg(long, env = "SUBELL_EPSILON", conflicts_with = "delta")]
    pub epsilon: Option<f64>,
    /// Stop once U_k ≤ δ‖g_k‖
    #[arg(long, env = "SUBELL_DELTA")]
    pub delta: Option<f64>,
    /// Output directory
    #[arg(long, env = "SUBELL_OUT")]
    pub out: PathBuf,
    /// Recorded in the summary
    #[arg(long, env = "SUBELL_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Record wall-clock time per iteration (makes traces nondeterministic)
    #[arg(long, env = "SUBELL_TIMING")]
    pub timing: bool,
    /// Keep only vectors in the history and recompute operators on demand
    #[arg(long, env = "SUBELL_LEAN")]
    pub lean: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Also build a certificate for the final iterate
    #[arg(long, env = "SUBELL_CERTIFY")]
    pub certify: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// pow2, every:N or final
    #[arg(long, env = "SUBELL_CADENCE", default_value = "pow2")]
    pub cadence: Cadence,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[arg(long, env = "SUBELL_PROBLEM")]
    pub problem: PathBuf,
    /// Comma-separated variant names
    #[arg(long, env = "SUBELL_VARIANTS", value_delimiter = ',', default_value = "subgradient,ellipsoid,ellipsoid-cert,subgrad-ellipsoid")]
    pub variants: Vec<Variant>,
    #[arg(long, env = "SUBELL_ITERS", default_value_t = 1000)]
    pub iters: usize,
    #[arg(long, env = "SUBELL_SCHEDULE", default_value = "decay")]
    pub schedule: AlphaSchedule,
    #[arg(long, env = "SUBELL_OUT")]
    pub out: PathBuf,
    #[arg(long, env = "SUBELL_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProblemKind {
    MaxAffine,
    ViAffine,
    Saddle,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum, default_value = "max-affine")]
    pub kind: ProblemKind,
    #[arg(long)]
    pub dim: usize,
    /// Number of affine pieces; defaults to 2·dim + 1
    #[arg(long)]
    pub rows: Option<usize>,
    #[arg(long, env = "SUBELL_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Destination file
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cadence {
    Pow2,
    Every(usize),
    Final,
}

impl Cadence {
    pub fn fires(self, k: usize, last: usize) -> bool {
        match self {
            Cadence::Pow2 => is_pow2_checkpoint(k) || k == last,
            Cadence::Every(n) => k % n == 0 || k == last,
            Cadence::Final => k == last,
        }
    }
}

impl FromStr for Cadence {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pow2" => Ok(Cadence::Pow2),
            "final" => Ok(Cadence::Final),
            _ => s
                .strip_prefix("every:")
                .and_then(|n| n.parse().ok())
                .filter(|&n: &usize| n > 0)
                .map(Cadence::Every)
                .ok_or_else(|| format!("invalid cadence '{s}' (expected pow2, every:N or final)")),
        }
    }
}

/// One line of the trace CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub k: usize,
    pub variant: Variant,
    pub productive: bool,
    pub f_value: Option<f64>,
    pub sliding_gap: Option<f64>,
    pub cert_gap: Option<f64>,
    pub r_k: f64,
    pub avrad: f64,
    pub gamma: f64,
    pub wall_time_us: Option<u128>,
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

impl CsvRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.k,
            self.variant,
            u8::from(self.productive),
            opt(self.f_value),
            opt(self.sliding_gap),
            opt(self.cert_gap),
            num(self.r_k),
            num(self.avrad),
            num(self.gamma),
            self.wall_time_us.map(|t| t.to_string()).unwrap_or_default()
        )
    }
}

/// A certificate built at iteration `k`.
#[derive(Debug, Clone, Serialize)]
pub struct Checkpoint {
    pub k: usize,
    pub pathway: &'static str,
    pub gamma_lambda: f64,
    pub s_lambda: f64,
    pub cert_gap: Option<f64>,
    pub sliding_gap: Option<f64>,
    pub residual: Option<f64>,
    pub residual_bound: Option<f64>,
    pub f_average: Option<f64>,
    pub rho: Option<f64>,
    pub gap_bound: Option<f64>,
    pub weights: Vec<f64>,
}

const CHECKPOINT_HEADER: &str =
    "k,pathway,Gamma_lambda,S_lambda,cert_gap,sliding_gap,residual,residual_bound,f_average,rho,gap_bound";

impl Checkpoint {
    fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.k,
            self.pathway,
            num(self.gamma_lambda),
            num(self.s_lambda),
            opt(self.cert_gap),
            opt(self.sliding_gap),
            opt(self.residual),
            opt(self.residual_bound),
            opt(self.f_average),
            opt(self.rho),
            opt(self.gap_bound)
        )
    }
}

/// Solver settings shared by the subcommands.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub variant: Variant,
    pub iters: usize,
    pub schedule: AlphaSchedule,
    pub delta: Option<f64>,
    pub timing: bool,
    pub mode: StorageMode,
}

impl RunSpec {
    fn from_args(args: &RunArgs, problem: &Problem) -> Self {
        Self {
            variant: args.variant,
            iters: args.iters,
            schedule: args.schedule,
            delta: termination_delta(args, problem),
            timing: args.timing,
            mode: if args.lean { StorageMode::Lean } else { StorageMode::Full },
        }
    }
}

/// `δ(ε) = εr/(ε + V)`.
pub fn delta_for_epsilon(epsilon: f64, r: f64, variation: f64) -> f64 {
    epsilon * r / (epsilon + variation)
}

fn termination_delta(args: &RunArgs, problem: &Problem) -> Option<f64> {
    args.delta
        .or_else(|| args.epsilon.map(|e| delta_for_epsilon(e, problem.inner_radius, problem.variation_bound)))
}

pub struct Execution {
    pub rows: Vec<CsvRow>,
    pub output: RunOutput,
    pub checkpoints: Vec<Checkpoint>,
}

/// Build the certificate appropriate for the variant at the solver's current iterate.
pub fn checkpoint(problem: &Problem, solver: &Solver) -> Result<Checkpoint, CertificateError> {
    let records = &solver.history().records;
    let state = solver.state();
    let (cert, pathway, rho, gap_bound) = if let Some(t) = solver.terminal() {
        (certify_terminal(records, state, t)?, "terminal", None, None)
    } else if solver.config().variant == Variant::StandardEllipsoid {
        let ec = certify_standard_ellipsoid(records, state, problem.inner_radius, problem.set.diameter())?;
        (ec.certificate, "min-width", Some(ec.rho), ec.gap_bound)
    } else {
        (certify_from_preliminary(records, state)?, "preliminary", None, None)
    };
    Ok(summarize(problem, solver, cert, pathway, rho, gap_bound))
}

fn summarize(
    problem: &Problem,
    solver: &Solver,
    cert: Semicertificate,
    pathway: &'static str,
    rho: Option<f64>,
    gap_bound: Option<f64>,
) -> Checkpoint {
    let records: &[HistoryRecord] = &solver.history().records;
    let cert_gap = cert.gap(records, &problem.x0, problem.radius).ok();
    let residual = cert.residual(records, &problem.x0, problem.radius).ok();
    let residual_bound =
        cert_gap.and_then(|d| residual_bound_from_gap(d, problem.inner_radius, problem.variation_bound).ok());
    let f_average = cert.average_point(records).ok().and_then(|x| problem.objective_value(&x));
    Checkpoint {
        k: solver.state().k,
        pathway,
        gamma_lambda: cert.gamma,
        s_lambda: cert.s_lambda,
        cert_gap,
        sliding_gap: solver.sliding_gap().ok(),
        residual,
        residual_bound,
        f_average,
        rho,
        gap_bound,
        weights: cert.weights,
    }
}

/// Run one variant, optionally building certificates on a cadence.
pub fn execute(problem: &Problem, spec: &RunSpec, cadence: Option<Cadence>) -> Result<Execution, CliError> {
    let mut config = StrategyConfig::new(spec.variant, problem.dim, spec.schedule)?;
    if let Some(d) = spec.delta {
        config = config.with_delta(d);
    }
    let start = Instant::now();
    let mut rows = Vec::with_capacity(spec.iters);
    let mut checkpoints = Vec::new();
    let mut failure = None;
    let output = run_with(problem, config, spec.iters, spec.mode, |solver, row| {
        let wall_time_us = spec.timing.then(|| start.elapsed().as_micros());
        let mut cert_gap = None;
        if cadence.is_some_and(|c| c.fires(row.k, spec.iters)) {
            match checkpoint(problem, solver) {
                Ok(cp) => {
                    cert_gap = cp.cert_gap;
                    checkpoints.push(cp);
                }
                Err(e) => {
                    failure = Some(e);
                    return Err(SolverError::Terminated);
                }
            }
        }
        rows.push(CsvRow {
            k: row.k,
            variant: spec.variant,
            productive: row.productive,
            f_value: row.f_value,
            sliding_gap: row.sliding_gap,
            cert_gap,
            r_k: row.r_k,
            avrad: row.avrad,
            gamma: row.gamma,
            wall_time_us,
        });
        Ok(())
    });
    if let Some(e) = failure {
        return Err(e.into());
    }
    let output = output?;
    if cadence.is_some() && output.termination == Termination::SmallSupport {
        checkpoints.push(checkpoint(problem, &output.solver)?);
    }
    Ok(Execution { rows, output, checkpoints })
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Output { path: path.to_owned(), source })
}

fn prepare_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Output { path: dir.to_owned(), source })
}

pub fn trace_csv(rows: &[CsvRow]) -> String {
    let mut out = String::with_capacity(rows.len() * 200);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv());
        out.push('\n');
    }
    out
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("summary serializes");
    s.push('\n');
    s
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub problem: String,
    pub variant: String,
    pub schedule: String,
    pub seed: u64,
    pub problem_seed: Option<u64>,
    pub iterations: usize,
    pub termination: &'static str,
    pub epsilon: Option<f64>,
    pub delta_term: Option<f64>,
    pub sliding_gap: Option<f64>,
    #[serde(rename = "R_k")]
    pub r_k: f64,
    pub avrad: f64,
    #[serde(rename = "Gamma_k")]
    pub gamma: f64,
    pub best_f: Option<f64>,
    pub fstar: Option<f64>,
    pub x_final: Vec<f64>,
    pub certificate: Option<Checkpoint>,
}

fn summary(args: &RunArgs, problem: &Problem, spec: &RunSpec, exec: &Execution) -> Summary {
    let st = exec.output.solver.state();
    Summary {
        problem: args.problem.display().to_string(),
        variant: spec.variant.to_string(),
        schedule: spec.schedule.to_string(),
        seed: args.seed,
        problem_seed: problem.seed,
        iterations: st.k,
        termination: exec.output.termination.name(),
        epsilon: args.epsilon,
        delta_term: spec.delta,
        sliding_gap: exec.output.solver.sliding_gap().ok(),
        r_k: st.radius(),
        avrad: exec.output.solver.avg_radius(),
        gamma: st.gamma_sum,
        best_f: exec.rows.iter().filter_map(|r| r.f_value).reduce(f64::min),
        fstar: problem.known_fstar,
        x_final: exec.output.solver.point().as_slice().to_vec(),
        certificate: None,
    }
}

pub fn cmd_solve(args: &SolveArgs) -> Result<(), CliError> {
    let problem = Problem::load(&args.run.problem)?;
    let spec = RunSpec::from_args(&args.run, &problem);
    let exec = execute(&problem, &spec, None)?;
    let mut sum = summary(&args.run, &problem, &spec, &exec);
    if args.certify {
        sum.certificate = Some(checkpoint(&problem, &exec.output.solver)?);
    }
    prepare_dir(&args.run.out)?;
    write_file(&args.run.out.join("trace.csv"), &trace_csv(&exec.rows))?;
    write_file(&args.run.out.join("summary.json"), &to_json(&sum))?;
    eprintln!(
        "{}: {} iterations, {}, sliding gap {}",
        spec.variant,
        sum.iterations,
        sum.termination,
        sum.sliding_gap.map(num).unwrap_or_else(|| "undefined".into())
    );
    Ok(())
}

pub fn cmd_certify(args: &CertifyArgs) -> Result<(), CliError> {
    let problem = Problem::load(&args.run.problem)?;
    let spec = RunSpec::from_args(&args.run, &problem);
    let exec = execute(&problem, &spec, Some(args.cadence))?;
    let mut sum = summary(&args.run, &problem, &spec, &exec);
    sum.certificate = exec.checkpoints.last().cloned();
    let mut table = String::new();
    table.push_str(CHECKPOINT_HEADER);
    table.push('\n');
    for cp in &exec.checkpoints {
        table.push_str(&cp.to_csv());
        table.push('\n');
    }
    prepare_dir(&args.run.out)?;
    write_file(&args.run.out.join("trace.csv"), &trace_csv(&exec.rows))?;
    write_file(&args.run.out.join("certificates.csv"), &table)?;
    write_file(&args.run.out.join("certificates.json"), &to_json(&exec.checkpoints))?;
    write_file(&args.run.out.join("summary.json"), &to_json(&sum))?;
    eprintln!("{}: {} certificates over {} iterations", spec.variant, exec.checkpoints.len(), sum.iterations);
    Ok(())
}

/// Crossover measurements for `compare`.
#[derive(Debug, Serialize, PartialEq)]
pub struct RegimeReport {
    pub dim: usize,
    pub iterations: usize,
    /// `[n² ln(2n), 3n² ln(2n)]`.
    pub window: [f64; 2],
    /// First `k` from which `avrad Ω_k ≤ R/√k` holds to the end of the run, per variant.
    pub avrad_crossover: Vec<(String, Option<usize>)>,
    /// First `k` after which the subgradient-ellipsoid sliding gap stays below
    /// the subgradient one.
    pub gap_crossover: Option<usize>,
}

impl RegimeReport {
    pub fn text(&self) -> String {
        let mut s = format!(
            "n = {}, window [{:.1}, {:.1}] (informational)\n",
            self.dim, self.window[0], self.window[1]
        );
        for (name, k) in &self.avrad_crossover {
            let _ = match k {
                Some(k) => writeln!(s, "  {name}: avrad below R/sqrt(k) from k = {k}"),
                None => writeln!(s, "  {name}: avrad stays above R/sqrt(k)"),
            };
        }
        if let Some(k) = self.gap_crossover {
            let _ = writeln!(s, "  sliding gap: subgrad-ellipsoid below subgradient from k = {k}");
        }
        s
    }
}

pub fn crossover_window(n: usize) -> [f64; 2] {
    let n = n as f64;
    let base = n * n * (2.0 * n).ln();
    [base, 3.0 * base]
}

/// Smallest `k` such that `below[i]` holds for every row from `k` on.
fn settled_from(below: &[bool]) -> Option<usize> {
    match below.iter().rposition(|b| !b) {
        None if !below.is_empty() => Some(1),
        Some(i) if i + 1 < below.len() => Some(i + 2),
        _ => None,
    }
}

pub fn regime_report(problem: &Problem, iters: usize, runs: &[(Variant, Vec<CsvRow>)]) -> RegimeReport {
    let avrad_crossover = runs
        .iter()
        .filter(|(v, _)| *v != Variant::Subgradient)
        .map(|(v, rows)| {
            let below: Vec<bool> = rows.iter().map(|r| r.avrad <= problem.radius / (r.k as f64).sqrt()).collect();
            (v.to_string(), settled_from(&below))
        })
        .collect();
    let rows_of = |want: Variant| runs.iter().find(|(v, _)| *v == want).map(|(_, r)| r);
    let gap_crossover = match (rows_of(Variant::Subgradient), rows_of(Variant::SubgradientEllipsoid)) {
        (Some(a), Some(b)) => {
            let below: Vec<bool> = a
                .iter()
                .zip(b)
                .map(|(x, y)| matches!((x.sliding_gap, y.sliding_gap), (Some(x), Some(y)) if y < x))
                .collect();
            settled_from(&below)
        }
        _ => None,
    };
    RegimeReport { dim: problem.dim, iterations: iters, window: crossover_window(problem.dim), avrad_crossover, gap_crossover }
}

pub fn compare_csv(problem: &Problem, iters: usize, runs: &[(Variant, Vec<CsvRow>)]) -> String {
    let mut out = String::from("k,R_over_sqrt_k");
    for (v, _) in runs {
        let _ = write!(out, ",{v}_sliding_gap,{v}_avrad,{v}_f_value");
    }
    out.push('\n');
    for k in 1..=iters {
        let _ = write!(out, "{k},{}", num(problem.radius / (k as f64).sqrt()));
        for (_, rows) in runs {
            match rows.get(k - 1) {
                Some(r) => {
                    let _ = write!(out, ",{},{},{}", opt(r.sliding_gap), num(r.avrad), opt(r.f_value));
                }
                None => out.push_str(",,,"),
            }
        }
        out.push('\n');
    }
    out
}

pub fn cmd_compare(args: &CompareArgs) -> Result<(), CliError> {
    let problem = Problem::load(&args.problem)?;
    if args.variants.is_empty() {
        return Err(CliError::Usage("no variants given".into()));
    }
    let results: Vec<Result<(Variant, Vec<CsvRow>), CliError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = args
            .variants
            .iter()
            .map(|&variant| {
                let problem = &problem;
                let spec = RunSpec {
                    variant,
                    iters: args.iters,
                    schedule: args.schedule,
                    delta: None,
                    timing: false,
                    mode: StorageMode::Lean,
                };
                scope.spawn(move || execute(problem, &spec, None).map(|e| (variant, e.rows)))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let runs = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let report = regime_report(&problem, args.iters, &runs);
    prepare_dir(&args.out)?;
    write_file(&args.out.join("compare.csv"), &compare_csv(&problem, args.iters, &runs))?;
    write_file(&args.out.join("report.json"), &to_json(&report))?;
    print!("{}", report.text());
    Ok(())
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<(), CliError> {
    let problem = match args.kind {
        ProblemKind::MaxAffine => generate::max_affine(args.dim, args.rows.unwrap_or(2 * args.dim + 1), args.seed)?,
        ProblemKind::ViAffine => generate::vi_affine(args.dim, args.seed)?,
        ProblemKind::Saddle => {
            if args.dim < 2 {
                return Err(CliError::Usage("saddle problems need dim ≥ 2".into()));
            }
            generate::saddle_bilinear(args.dim / 2, args.dim - args.dim / 2, args.seed)?
        }
    };
    let mut text = problem.to_json();
    text.push('\n');
    write_file(&args.out, &text)
}

pub fn dispatch(command: &Command) -> Result<(), CliError> {
    match command {
        Command::Solve(a) => cmd_solve(a),
        Command::Certify(a) => cmd_certify(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Generate(a) => cmd_generate(a),
    }
}

/// Parse arguments, run the command and return the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
