//! Command-line surface and CSV formats.
//!
//! Values resolve in three layers: command-line flags, then the JSON file
//! named by `--config`, then built-in defaults. Every failure prints one line
//! `error[<code>]: <message>` to stderr and exits nonzero.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::analysis::{linear_grid, sweep_w, symmetry_locus_mu_v, SweepMode, SweepRow};
use crate::error::Error;
use crate::model::{ModelParams, SIGMA_V_SINGLE_PEAK};
use crate::oracle::{certify, OracleReport};
use crate::solver::{solve, solve_asymmetric, EquilibriumKind, EquilibriumResult, SolverConfig};
use crate::verify::{run_suite, VerifyConfig, DEFAULT_SEED};

/// Environment variable capping sweep parallelism.
pub const THREADS_ENV: &str = "POLARSOLVE_THREADS";

/// Share of certified rows a sweep needs for a zero exit status.
pub const SWEEP_PASS_SHARE: f64 = 0.95;

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NON_CONVERGENCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "polarsolve",
    version,
    about = "Equilibrium platforms under ideological polarization"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one parameter set and print the equilibrium as JSON.
    Solve(SolveArgs),
    /// Equilibria over a grid of w, as CSV.
    Sweep(SweepArgs),
    /// Points (w, mu_i, mu_v) of the symmetry locus, as CSV.
    Locus(LocusArgs),
    /// Run the named verification checks.
    Verify(VerifyArgs),
    /// Yearly polarization from `year,party,score` records.
    Empirical(EmpiricalArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub w: Option<f64>,
    /// Office rent.
    #[arg(long = "V", allow_hyphen_values = true)]
    pub office_rent: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub sigma_i: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub sigma_v: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub mu_i: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub mu_v: Option<f64>,
    /// JSON file with defaults for any of these options.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub w_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub w_max: Option<f64>,
    /// Number of grid points, endpoints included.
    #[arg(long)]
    pub w_steps: Option<usize>,
    #[arg(long, value_enum)]
    pub mode: Option<SweepMode>,
}

#[derive(Debug, Clone, Args)]
pub struct LocusArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Values of w, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub w_values: Option<Vec<f64>>,
    /// Number of mu_i points on [0, 1].
    #[arg(long)]
    pub mu_i_steps: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Run only these checks (repeatable).
    #[arg(long)]
    pub only: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct EmpiricalArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// CSV with header `year,party,score`; party is `L` or `R`.
    pub input: Option<PathBuf>,
}

/// Contents of a `--config` file. Every field is optional.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub params: FileParams,
    pub solver: Option<SolverConfig>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub w_min: Option<f64>,
    pub w_max: Option<f64>,
    pub w_steps: Option<usize>,
    pub mode: Option<SweepMode>,
    pub w_values: Option<Vec<f64>>,
    pub mu_i_steps: Option<usize>,
    pub only: Option<Vec<String>>,
    pub input: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileParams {
    pub w: Option<f64>,
    #[serde(rename = "V")]
    pub office_rent: Option<f64>,
    pub sigma_i: Option<f64>,
    pub sigma_v: Option<f64>,
    pub mu_i: Option<f64>,
    pub mu_v: Option<f64>,
}

/// Fully resolved settings shared by every command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    pub solver: SolverConfig,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
pub struct CliError {
    pub code: &'static str,
    pub message: String,
    pub exit: i32,
}

impl CliError {
    pub fn new(code: &'static str, exit: i32, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
            exit,
        }
    }

    pub fn line(&self) -> String {
        let flat = self.message.replace('\n', " ");
        format!("error[{}]: {flat}", self.code)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.line())
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let exit = match e {
            Error::InvalidParams { .. } | Error::NonFinite { .. } | Error::DegenerateLocus => {
                EXIT_INVALID
            }
            Error::NonConvergence { .. } | Error::Oscillation { .. } => EXIT_NON_CONVERGENCE,
            _ => EXIT_FAILURE,
        };
        CliError::new(e.code(), exit, e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::new("io", EXIT_FAILURE, e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::new("csv", EXIT_INVALID, e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn load_file_config(path: Option<&Path>) -> CliResult<FileConfig> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::new(
            "config",
            EXIT_INVALID,
            format!("cannot read {}: {e}", path.display()),
        )
    })?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::new("config", EXIT_INVALID, format!("{}: {e}", path.display())))
}

/// Merges flags over the file over defaults and validates the result.
pub fn resolve(common: &CommonArgs, file: &FileConfig) -> CliResult<RunConfig> {
    let d = ModelParams::default();
    let fp = &file.params;
    let params = ModelParams::new(
        common.w.or(fp.w).unwrap_or(d.w()),
        common
            .office_rent
            .or(fp.office_rent)
            .unwrap_or(d.office_rent()),
        common.sigma_i.or(fp.sigma_i).unwrap_or(d.sigma_i()),
        common.sigma_v.or(fp.sigma_v).unwrap_or(d.sigma_v()),
        common.mu_i.or(fp.mu_i).unwrap_or(d.mu_i()),
        common.mu_v.or(fp.mu_v).unwrap_or(d.mu_v()),
    )?;
    let solver = file.solver.unwrap_or_default();
    solver.validate()?;
    Ok(RunConfig {
        params,
        solver,
        seed: common.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        out: common.out.clone().or_else(|| file.out.clone()),
    })
}

fn open_output(out: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(io::BufWriter::new(File::create(path).map_err(|e| {
            CliError::new(
                "io",
                EXIT_FAILURE,
                format!("cannot create {}: {e}", path.display()),
            )
        })?)),
        None => Box::new(io::stdout().lock()),
    })
}

/// Sweep rows as CSV. Floats use the shortest representation that parses
/// back to the same bits.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> CliResult<()> {
    let mut wtr = csv::Writer::from_writer(out);
    for row in rows {
        wtr.serialize(row)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_sweep_csv<R: Read>(input: R) -> CliResult<Vec<SweepRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    let rows = rdr.deserialize().collect::<Result<Vec<SweepRow>, _>>()?;
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocusRow {
    pub w: f64,
    pub mu_i: f64,
    pub mu_v: f64,
}

pub fn locus_rows(w_values: &[f64], mu_i_steps: usize) -> Vec<LocusRow> {
    w_values
        .iter()
        .flat_map(|&w| {
            linear_grid(0.0, 1.0, mu_i_steps)
                .into_iter()
                .map(move |mu_i| LocusRow {
                    w,
                    mu_i,
                    mu_v: symmetry_locus_mu_v(w, mu_i),
                })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarizationRecord {
    pub year: i64,
    pub polarization: f64,
}

#[derive(Debug, Deserialize)]
struct ScoreRecord {
    year: i64,
    party: String,
    score: f64,
}

/// Mean `R` score minus mean `L` score for each year with members of both
/// parties, sorted by year. Returns one warning per skipped year.
pub fn polarization_series<R: Read>(input: R) -> CliResult<(Vec<PolarizationRecord>, Vec<String>)> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers()?.clone();
    for column in ["year", "party", "score"] {
        if !headers.iter().any(|h| h.trim() == column) {
            return Err(CliError::new(
                "missing-column",
                EXIT_INVALID,
                format!("input lacks column `{column}`"),
            ));
        }
    }
    let mut by_year: BTreeMap<i64, [(f64, usize); 2]> = BTreeMap::new();
    for (line, rec) in rdr.deserialize::<ScoreRecord>().enumerate() {
        let rec = rec?;
        let slot = match rec.party.trim() {
            "L" => 0,
            "R" => 1,
            other => {
                return Err(CliError::new(
                    "invalid-party",
                    EXIT_INVALID,
                    format!("record {}: party `{other}` is neither L nor R", line + 1),
                ))
            }
        };
        let entry = by_year.entry(rec.year).or_default();
        entry[slot].0 += rec.score;
        entry[slot].1 += 1;
    }
    let mut records = Vec::new();
    let mut warnings = Vec::new();
    for (year, [(sum_l, n_l), (sum_r, n_r)]) in by_year {
        if n_l == 0 || n_r == 0 {
            let missing = if n_l == 0 { "L" } else { "R" };
            warnings.push(format!("year {year} has no {missing} member; skipped"));
            continue;
        }
        records.push(PolarizationRecord {
            year,
            polarization: sum_r / n_r as f64 - sum_l / n_l as f64,
        });
    }
    Ok((records, warnings))
}

fn thread_pool() -> CliResult<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(value) = std::env::var(THREADS_ENV) {
        let n: usize = value
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| {
                CliError::new(
                    "invalid-env",
                    EXIT_INVALID,
                    format!("{THREADS_ENV} must be a positive integer, got `{value}`"),
                )
            })?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| CliError::new("threads", EXIT_FAILURE, e.to_string()))
}

fn warn_single_peak(params: &ModelParams) {
    if !params.single_peaked_guaranteed() {
        eprintln!(
            "warning: sigma_v = {} is below {SIGMA_V_SINGLE_PEAK}; single-peakedness is not guaranteed, best responses use a 1e-4 grid pre-scan",
            params.sigma_v()
        );
    }
}

#[derive(Debug, Serialize)]
struct SolveReport<'a> {
    params: &'a ModelParams,
    p_l: f64,
    p_r: f64,
    delta: f64,
    pr_l: f64,
    foc_residual_l: f64,
    foc_residual_r: f64,
    soc_l: f64,
    soc_r: f64,
    iterations: usize,
    kind: EquilibriumKind,
    symmetric: bool,
    single_peak_warning: bool,
    certified: bool,
    oracle: OracleReport,
}

pub fn cmd_solve(args: &SolveArgs) -> CliResult<i32> {
    let file = load_file_config(args.common.config.as_deref())?;
    let cfg = resolve(&args.common, &file)?;
    warn_single_peak(&cfg.params);
    let mut eq: EquilibriumResult = solve(&cfg.params, &cfg.solver)?;
    let oracle = certify(&mut eq, &cfg.params, &cfg.solver, cfg.seed);
    let report = SolveReport {
        params: &cfg.params,
        p_l: eq.platforms.p_l,
        p_r: eq.platforms.p_r,
        delta: eq.delta(),
        pr_l: eq.pr_l,
        foc_residual_l: eq.foc_residual_l,
        foc_residual_r: eq.foc_residual_r,
        soc_l: eq.soc_l,
        soc_r: eq.soc_r,
        iterations: eq.iterations,
        kind: eq.kind,
        symmetric: eq.is_symmetric(1e-6),
        single_peak_warning: eq.single_peak_warning,
        certified: eq.certified,
        oracle,
    };
    let mut out = open_output(cfg.out.as_deref())?;
    serde_json::to_writer_pretty(&mut out, &report)
        .map_err(|e| CliError::new("io", EXIT_FAILURE, e.to_string()))?;
    writeln!(out)?;
    Ok(if eq.certified { 0 } else { EXIT_FAILURE })
}

pub fn cmd_sweep(args: &SweepArgs) -> CliResult<i32> {
    let file = load_file_config(args.common.config.as_deref())?;
    let cfg = resolve(&args.common, &file)?;
    let w_min = args.w_min.or(file.w_min).unwrap_or(0.0);
    let w_max = args.w_max.or(file.w_max).unwrap_or(2.0);
    let steps = args.w_steps.or(file.w_steps).unwrap_or(201);
    let mode = args.mode.or(file.mode).unwrap_or_default();
    if !(w_min >= 0.0 && w_max >= w_min && steps >= 1) || (steps > 1 && w_max == w_min) {
        return Err(CliError::new(
            "invalid-grid",
            EXIT_INVALID,
            format!("need 0 <= w_min < w_max and w_steps >= 1 (got {w_min}, {w_max}, {steps})"),
        ));
    }
    warn_single_peak(&cfg.params);
    let grid = linear_grid(w_min, w_max, steps);
    let rows = thread_pool()?.install(|| sweep_w(&grid, &cfg.params, mode, &cfg.solver))?;
    for row in rows.iter().filter(|r| r.error.is_some()) {
        eprintln!(
            "warning: w = {}: {}",
            row.w,
            row.error.as_deref().unwrap_or_default()
        );
    }
    write_sweep_csv(&rows, open_output(cfg.out.as_deref())?)?;
    let certified = rows.iter().filter(|r| r.certified).count();
    eprintln!("sweep: {certified}/{} rows certified", rows.len());
    Ok(
        if certified as f64 >= SWEEP_PASS_SHARE * rows.len() as f64 {
            0
        } else {
            EXIT_FAILURE
        },
    )
}

pub fn cmd_locus(args: &LocusArgs) -> CliResult<i32> {
    let file = load_file_config(args.common.config.as_deref())?;
    let cfg = resolve(&args.common, &file)?;
    let w_values = args
        .w_values
        .clone()
        .or_else(|| file.w_values.clone())
        .unwrap_or_else(|| vec![0.5, 1.0, 2.0]);
    let steps = args.mu_i_steps.or(file.mu_i_steps).unwrap_or(21);
    if w_values.is_empty() || w_values.iter().any(|w| !(*w >= 0.0 && w.is_finite())) || steps < 2 {
        return Err(CliError::new(
            "invalid-grid",
            EXIT_INVALID,
            "w values must be finite and >= 0, mu_i_steps >= 2",
        ));
    }
    let rows = locus_rows(&w_values, steps);

    let picks = 10.min(rows.len());
    let mut failures = 0;
    for k in 0..picks {
        let row = rows[k * (rows.len() - 1) / (picks - 1).max(1)];
        let params = cfg
            .params
            .with_w(row.w)?
            .with_mu_i(row.mu_i)?
            .with_mu_v(row.mu_v)?;
        let gap = solve_asymmetric(&params, &cfg.solver)?
            .platforms
            .asymmetry();
        if !(gap.abs() < 1e-6) {
            failures += 1;
            eprintln!("warning: locus point {row:?} solved with p_L + p_R - 1 = {gap:e}");
        }
    }
    eprintln!(
        "locus: {}/{picks} subsample points confirmed symmetric",
        picks - failures
    );

    let mut wtr = csv::Writer::from_writer(open_output(cfg.out.as_deref())?);
    for row in &rows {
        wtr.serialize(row)?;
    }
    wtr.flush()?;
    Ok(if failures == 0 { 0 } else { EXIT_FAILURE })
}

pub fn cmd_verify(args: &VerifyArgs) -> CliResult<i32> {
    let file = load_file_config(args.common.config.as_deref())?;
    let cfg = resolve(&args.common, &file)?;
    let only = if args.only.is_empty() {
        file.only.clone().unwrap_or_default()
    } else {
        args.only.clone()
    };
    let verify_cfg = VerifyConfig {
        seed: cfg.seed,
        solver: cfg.solver,
    };
    let outcomes = run_suite(&only, &verify_cfg)
        .map_err(|e| CliError::new("unknown-check", EXIT_INVALID, e.to_string()))?;
    let mut out = open_output(cfg.out.as_deref())?;
    for o in &outcomes {
        writeln!(out, "{}", o.line())?;
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    writeln!(
        out,
        "verify: {}/{} checks passed",
        outcomes.len() - failed,
        outcomes.len()
    )?;
    Ok(if failed == 0 { 0 } else { EXIT_FAILURE })
}

pub fn cmd_empirical(args: &EmpiricalArgs) -> CliResult<i32> {
    let file = load_file_config(args.common.config.as_deref())?;
    let cfg = resolve(&args.common, &file)?;
    let input = args
        .input
        .clone()
        .or_else(|| file.input.clone())
        .ok_or_else(|| CliError::new("missing-input", EXIT_INVALID, "no input file given"))?;
    let reader = File::open(&input).map_err(|e| {
        CliError::new(
            "io",
            EXIT_FAILURE,
            format!("cannot open {}: {e}", input.display()),
        )
    })?;
    let (records, warnings) = polarization_series(io::BufReader::new(reader))?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    let mut wtr = csv::Writer::from_writer(open_output(cfg.out.as_deref())?);
    for r in &records {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(0)
}

pub fn run(cli: &Cli) -> i32 {
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Locus(a) => cmd_locus(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Empirical(a) => cmd_empirical(a),
    };
    result.unwrap_or_else(|e| {
        eprintln!("{}", e.line());
        e.exit
    })
}

/// Parses `args` and runs the command. Usage errors follow the same
/// `error[usage]` convention as every other failure.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            0
        }
        Err(e) => {
            let first = e.to_string();
            let first = first
                .lines()
                .next()
                .unwrap_or("")
                .trim_start_matches("error: ");
            eprintln!("error[usage]: {first}");
            EXIT_INVALID
        }
    }
}
