//! Batch front end: parses a run configuration from flags and an optional
//! JSON file, runs one mode against one scheme and writes a JSON or CSV
//! report.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize, Serializer};
use serde_json::value::RawValue;
use thiserror::Error;

use retroalign::eval::{
    check_future_independence, dof_by_counting, estimate_dof, expected_interference_rank, run_trials,
    validate_grid, DofEstimate, EvalError, SchemeId, TrialConfig, TrialResult,
};
use retroalign::numerics::Tolerance;

/// Largest allowed gap between a fitted slope and the counted DoF.
pub const SLOPE_TOL: f64 = 0.05;
/// Smallest acceptable coefficient of determination for a sweep fit.
pub const MIN_R_SQUARED: f64 = 0.999;

pub const EXIT_PASS: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_SCHEME_FAILURE: u8 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Mode {
    Verify,
    DofSweep,
    Audit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scheme: SchemeId,
    pub mode: Mode,
    pub trials: usize,
    pub seed: u64,
    pub snr_grid_db: Option<Vec<f64>>,
    pub tolerances: Tolerance,
    pub output_path: Option<PathBuf>,
    pub output_format: OutputFormat,
    /// Worker cap; `None` uses all available parallelism.
    pub threads: Option<usize>,
}

pub const DEFAULT_TRIALS: usize = 100;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Clap(#[from] clap::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Eval(#[from] EvalError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Clap(e) if !e.use_stderr() => EXIT_PASS,
            CliError::Clap(_) | CliError::Usage(_) => EXIT_USAGE,
            CliError::Eval(EvalError::Grid(_) | EvalError::NoTrials) => EXIT_USAGE,
            CliError::Eval(_) => EXIT_SCHEME_FAILURE,
            CliError::Io { .. } => EXIT_FAIL,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Debug, Parser)]
#[command(name = "retroalign", version, about = "Run, sweep or audit an interference alignment scheme")]
struct Args {
    /// Scheme to run.
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Monte Carlo trials (per SNR point for sweeps).
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated SNR values in dB.
    #[arg(long = "snr-grid", value_delimiter = ',', allow_hyphen_values = true)]
    snr_grid: Option<Vec<f64>>,
    #[arg(long = "tol-rank")]
    tol_rank: Option<f64>,
    #[arg(long = "tol-residual")]
    tol_residual: Option<f64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    #[arg(long)]
    threads: Option<usize>,
    /// JSON file with RunConfig fields; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileTolerances {
    rank_rel_tol: Option<f64>,
    residual_rel_tol: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    scheme: Option<String>,
    mode: Option<Mode>,
    trials: Option<usize>,
    seed: Option<u64>,
    snr_grid_db: Option<Vec<f64>>,
    #[serde(default)]
    tolerances: FileTolerances,
    output_path: Option<PathBuf>,
    output_format: Option<OutputFormat>,
    threads: Option<usize>,
}

fn read_config_file(path: &PathBuf) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("--config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("--config {}: {e}", path.display())))
}

/// Parses command-line arguments (program name first). Flags take precedence
/// over values from `--config`.
pub fn parse_config<I, T>(args: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let a = Args::try_parse_from(args)?;
    let file = match &a.config {
        Some(p) => read_config_file(p)?,
        None => FileConfig::default(),
    };

    let scheme_name = a
        .scheme
        .or(file.scheme)
        .ok_or_else(|| usage("--scheme is required"))?;
    let scheme: SchemeId = scheme_name.parse().map_err(|e| usage(format!("--scheme: {e}")))?;
    let mode = a.mode.or(file.mode).ok_or_else(|| usage("--mode is required"))?;

    let trials = a.trials.or(file.trials).unwrap_or(DEFAULT_TRIALS);
    if trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }

    let snr_grid_db = a.snr_grid.or(file.snr_grid_db);
    match (mode, &snr_grid_db) {
        (Mode::DofSweep, None) => return Err(usage("--snr-grid is required for --mode dof_sweep")),
        (Mode::DofSweep, Some(g)) => validate_grid(g).map_err(|e| usage(format!("--snr-grid: {e}")))?,
        (_, Some(_)) => return Err(usage("--snr-grid is only valid with --mode dof_sweep")),
        (_, None) => {}
    }

    let defaults = Tolerance::default();
    let rank = a.tol_rank.or(file.tolerances.rank_rel_tol).unwrap_or(defaults.rank_rel_tol);
    let residual = a
        .tol_residual
        .or(file.tolerances.residual_rel_tol)
        .unwrap_or(defaults.residual_rel_tol);
    let tolerances = Tolerance::new(rank, residual).map_err(|e| usage(format!("--tol-rank/--tol-residual: {e}")))?;

    let output_format = a.format.or(file.output_format).unwrap_or_default();
    if output_format == OutputFormat::Csv && mode != Mode::DofSweep {
        return Err(usage("--format csv is only available for --mode dof_sweep"));
    }

    let threads = a.threads.or(file.threads);
    if threads == Some(0) {
        return Err(usage("--threads must be at least 1"));
    }

    Ok(RunConfig {
        scheme,
        mode,
        trials,
        seed: a.seed.or(file.seed).unwrap_or(0),
        snr_grid_db,
        tolerances,
        output_path: a.out.or(file.output_path),
        output_format,
        threads,
    })
}

fn fixed(x: f64) -> Box<RawValue> {
    let text = if x.is_finite() { format!("{x:.16e}") } else { "null".to_string() };
    RawValue::from_string(text).expect("formatted float is valid JSON")
}

fn ser_f64<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    fixed(*x).serialize(s)
}

fn ser_vec_f64<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
    v.iter().map(|&x| fixed(x)).collect::<Vec<_>>().serialize(s)
}

fn ser_opt_vec_f64<S: Serializer>(v: &Option<Vec<f64>>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => ser_vec_f64(v, s),
        None => s.serialize_none(),
    }
}

#[derive(Serialize)]
struct TolEcho {
    #[serde(serialize_with = "ser_f64")]
    rank_rel_tol: f64,
    #[serde(serialize_with = "ser_f64")]
    residual_rel_tol: f64,
}

#[derive(Serialize)]
struct ConfigEcho {
    scheme: SchemeId,
    mode: Mode,
    trials: usize,
    seed: u64,
    #[serde(serialize_with = "ser_opt_vec_f64")]
    snr_grid_db: Option<Vec<f64>>,
    tolerances: TolEcho,
    output_format: OutputFormat,
}

impl From<&RunConfig> for ConfigEcho {
    fn from(c: &RunConfig) -> Self {
        ConfigEcho {
            scheme: c.scheme,
            mode: c.mode,
            trials: c.trials,
            seed: c.seed,
            snr_grid_db: c.snr_grid_db.clone(),
            tolerances: TolEcho {
                rank_rel_tol: c.tolerances.rank_rel_tol,
                residual_rel_tol: c.tolerances.residual_rel_tol,
            },
            output_format: c.output_format,
        }
    }
}

#[derive(Serialize)]
struct TrialSummary {
    trial: usize,
    attempt: usize,
    discarded: usize,
    decode_ok: bool,
    #[serde(serialize_with = "ser_f64")]
    max_rel_symbol_error: f64,
    interference_ranks: Vec<usize>,
    #[serde(serialize_with = "ser_f64")]
    min_resolvability: f64,
    #[serde(serialize_with = "ser_f64")]
    min_abs_determinant: f64,
    structure_ok: bool,
    causality_ok: bool,
    csi_slots: Vec<usize>,
    output_pairs: Vec<(usize, usize)>,
    future_independence_violations: usize,
}

#[derive(Serialize)]
pub struct VerifyReport {
    trials: usize,
    decode_ok: usize,
    ranks_ok: usize,
    causality_ok: usize,
    discards: usize,
    expected_interference_rank: Option<usize>,
    #[serde(serialize_with = "ser_f64")]
    max_rel_symbol_error: f64,
    #[serde(serialize_with = "ser_f64")]
    min_resolvability: f64,
    #[serde(serialize_with = "ser_f64")]
    min_abs_determinant: f64,
    future_independence_violations: usize,
    per_trial: Vec<TrialSummary>,
}

#[derive(Serialize)]
pub struct SweepReport {
    dof_by_counting: String,
    #[serde(serialize_with = "ser_f64")]
    dof_by_counting_value: f64,
    snr_grid_db: Vec<Box<RawValue>>,
    sum_rates: Vec<Box<RawValue>>,
    trials: usize,
    discards: Vec<usize>,
    #[serde(serialize_with = "ser_f64")]
    slope: f64,
    #[serde(serialize_with = "ser_f64")]
    intercept: f64,
    #[serde(serialize_with = "ser_f64")]
    r_squared: f64,
    #[serde(serialize_with = "ser_f64")]
    slope_tolerance: f64,
    #[serde(serialize_with = "ser_f64")]
    min_r_squared: f64,
}

#[derive(Serialize)]
pub struct AuditReport {
    trials: usize,
    block_len: usize,
    csi_slots: Vec<usize>,
    expected_csi_slots: Vec<usize>,
    feedback_fraction: String,
    #[serde(serialize_with = "ser_f64")]
    feedback_fraction_value: f64,
    output_pairs: Vec<(usize, usize)>,
    relays_outputs: bool,
    own_outputs_only: bool,
    causality_ok: usize,
}

#[derive(Serialize)]
#[serde(untagged)]
pub enum Results {
    Verify(VerifyReport),
    DofSweep(SweepReport),
    Audit(AuditReport),
}

/// Outcome of a completed run.
pub struct Report {
    config: RunConfig,
    pub results: Results,
    /// Raw sweep estimate, kept for CSV output.
    sweep: Option<DofEstimate>,
    pub pass: bool,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    config: ConfigEcho,
    results: &'a Results,
    pass: bool,
}

#[derive(Serialize)]
struct ErrorRecord {
    kind: &'static str,
    message: String,
}

#[derive(Serialize)]
struct JsonError {
    config: ConfigEcho,
    error: ErrorRecord,
    pass: bool,
}

impl Report {
    pub fn to_json(&self) -> String {
        let doc = JsonReport {
            config: ConfigEcho::from(&self.config),
            results: &self.results,
            pass: self.pass,
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
        s.push('\n');
        s
    }

    /// Sweep table; `None` outside `dof_sweep`.
    pub fn to_csv(&self) -> Option<String> {
        let est = self.sweep.as_ref()?;
        let mut s = String::from("snr_db,sum_rate,trials,discards\n");
        for ((db, rate), d) in est.snr_grid_db.iter().zip(&est.sum_rates).zip(&est.discards) {
            writeln!(s, "{db:.16e},{rate:.16e},{},{d}", est.trials).unwrap();
        }
        Some(s)
    }

    pub fn render(&self) -> String {
        match self.config.output_format {
            OutputFormat::Json => self.to_json(),
            OutputFormat::Csv => self.to_csv().expect("csv is limited to sweeps"),
        }
    }
}

/// Structured record written when a run aborts on a scheme failure.
pub fn error_json(config: &RunConfig, err: &CliError) -> String {
    let kind = match err {
        CliError::Eval(EvalError::SchemeFailure { source, .. }) => match source {
            retroalign::scheme::SchemeError::Causality(_) => "causality_violation",
            _ => "scheme_failure",
        },
        CliError::Eval(EvalError::RetriesExhausted { .. }) => "retries_exhausted",
        CliError::Eval(EvalError::Channel { .. }) => "channel",
        CliError::Eval(_) | CliError::Usage(_) | CliError::Clap(_) => "usage",
        CliError::Io { .. } => "io",
    };
    let doc = JsonError {
        config: ConfigEcho::from(config),
        error: ErrorRecord {
            kind,
            message: err.to_string(),
        },
        pass: false,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("error record serializes");
    s.push('\n');
    s
}

fn trial_config(c: &RunConfig) -> TrialConfig {
    TrialConfig {
        tol: c.tolerances,
        ..TrialConfig::default()
    }
}

fn ranks_ok(id: SchemeId, r: &TrialResult) -> bool {
    match expected_interference_rank(id) {
        Some(k) => r.interference_ranks.len() == id.info().num_rx && r.interference_ranks.iter().all(|&x| x == k),
        None => true,
    }
}

fn verify(c: &RunConfig) -> Result<(Results, bool), CliError> {
    let cfg = trial_config(c);
    let results = run_trials(c.scheme, c.trials, c.seed, &cfg)?;
    let replays: Vec<_> = {
        use rayon::prelude::*;
        (0..c.trials)
            .into_par_iter()
            .map(|t| check_future_independence(c.scheme, t, c.seed, &cfg))
            .collect::<Result<_, _>>()?
    };
    let per_trial: Vec<TrialSummary> = results
        .iter()
        .zip(&replays)
        .map(|(r, rep)| TrialSummary {
            trial: r.trial,
            attempt: r.attempt,
            discarded: r.discarded(),
            decode_ok: r.decode_ok,
            max_rel_symbol_error: r.max_rel_symbol_error,
            interference_ranks: r.interference_ranks.clone(),
            min_resolvability: r.min_resolvability,
            min_abs_determinant: r.min_abs_determinant,
            structure_ok: r.structure_ok,
            causality_ok: r.causality_ok,
            csi_slots: r.csi_slots.iter().copied().collect(),
            output_pairs: r.output_pairs.iter().copied().collect(),
            future_independence_violations: rep.violations.len(),
        })
        .collect();
    let report = VerifyReport {
        trials: c.trials,
        decode_ok: results.iter().filter(|r| r.decode_ok).count(),
        ranks_ok: results.iter().filter(|r| ranks_ok(c.scheme, r)).count(),
        causality_ok: results.iter().filter(|r| r.causality_ok).count(),
        discards: results.iter().map(TrialResult::discarded).sum(),
        expected_interference_rank: expected_interference_rank(c.scheme),
        max_rel_symbol_error: results.iter().map(|r| r.max_rel_symbol_error).fold(0.0, f64::max),
        min_resolvability: results.iter().map(|r| r.min_resolvability).fold(f64::INFINITY, f64::min),
        min_abs_determinant: results.iter().map(|r| r.min_abs_determinant).fold(f64::INFINITY, f64::min),
        future_independence_violations: replays.iter().map(|r| r.violations.len()).sum(),
        per_trial,
    };
    let pass = results.iter().all(|r| r.passed() && ranks_ok(c.scheme, r)) && report.future_independence_violations == 0;
    Ok((Results::Verify(report), pass))
}

fn sweep(c: &RunConfig) -> Result<(Results, DofEstimate, bool), CliError> {
    let grid = c.snr_grid_db.as_deref().expect("validated sweep grid");
    let est = estimate_dof(c.scheme, grid, c.trials, c.seed, &trial_config(c))?;
    let dof = dof_by_counting(c.scheme);
    let dof_value = *dof.numer() as f64 / *dof.denom() as f64;
    let pass = (est.slope - dof_value).abs() <= SLOPE_TOL && est.r_squared >= MIN_R_SQUARED;
    let report = SweepReport {
        dof_by_counting: dof.to_string(),
        dof_by_counting_value: dof_value,
        snr_grid_db: est.snr_grid_db.iter().map(|&x| fixed(x)).collect(),
        sum_rates: est.sum_rates.iter().map(|&x| fixed(x)).collect(),
        trials: est.trials,
        discards: est.discards.clone(),
        slope: est.slope,
        intercept: est.intercept,
        r_squared: est.r_squared,
        slope_tolerance: SLOPE_TOL,
        min_r_squared: MIN_R_SQUARED,
    };
    Ok((Results::DofSweep(report), est, pass))
}

fn audit(c: &RunConfig) -> Result<(Results, bool), CliError> {
    let results = run_trials(c.scheme, c.trials, c.seed, &trial_config(c))?;
    let info = c.scheme.info();
    let csi: BTreeSet<usize> = results.iter().flat_map(|r| r.csi_slots.iter().copied()).collect();
    let pairs: BTreeSet<(usize, usize)> = results.iter().flat_map(|r| r.output_pairs.iter().copied()).collect();
    let expected: Vec<usize> = (0..info.csi_slots).collect();
    let relays = matches!(c.scheme, SchemeId::XOutputFb | SchemeId::Ic3OutputFb);
    let own_only = pairs.iter().all(|&(tx, rx)| tx == rx);
    let causality_ok = results.iter().filter(|r| r.causality_ok).count();
    let mut pass = csi.iter().copied().eq(expected.iter().copied()) && causality_ok == c.trials;
    if c.scheme == SchemeId::Ic3OutputFb {
        pass &= own_only;
    }
    let report = AuditReport {
        trials: c.trials,
        block_len: info.block_len,
        feedback_fraction: format!("{}/{}", csi.len(), info.block_len),
        feedback_fraction_value: csi.len() as f64 / info.block_len as f64,
        csi_slots: csi.into_iter().collect(),
        expected_csi_slots: expected,
        output_pairs: pairs.into_iter().collect(),
        relays_outputs: relays,
        own_outputs_only: own_only,
        causality_ok,
    };
    Ok((Results::Audit(report), pass))
}

fn execute(c: &RunConfig) -> Result<Report, CliError> {
    let (results, sweep_est, pass) = match c.mode {
        Mode::Verify => {
            let (r, p) = verify(c)?;
            (r, None, p)
        }
        Mode::DofSweep => {
            let (r, e, p) = sweep(c)?;
            (r, Some(e), p)
        }
        Mode::Audit => {
            let (r, p) = audit(c)?;
            (r, None, p)
        }
    };
    Ok(Report {
        config: c.clone(),
        results,
        sweep: sweep_est,
        pass,
    })
}

/// Runs `config` on a pool capped at `config.threads` workers.
pub fn run(config: &RunConfig) -> Result<Report, CliError> {
    match config.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| usage(format!("--threads: {e}")))?;
            pool.install(|| execute(config))
        }
        None => execute(config),
    }
}

fn emit(config: &RunConfig, text: &str) -> Result<(), CliError> {
    match &config.output_path {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io {
            path: p.display().to_string(),
            source,
        }),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|source| CliError::Io {
            path: "<stdout>".into(),
            source,
        }),
    }
}

/// Full program: parse, run, write, and map the outcome to an exit code.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match parse_config(args) {
        Ok(c) => c,
        Err(CliError::Clap(e)) => {
            let _ = e.print();
            return ExitCode::from(CliError::Clap(e).exit_code());
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    match run(&config) {
        Ok(report) => {
            if let Err(e) = emit(&config, &report.render()) {
                eprintln!("error: {e}");
                return ExitCode::from(e.exit_code());
            }
            eprintln!("{} {:?}: {}", config.scheme, config.mode, if report.pass { "PASS" } else { "FAIL" });
            ExitCode::from(if report.pass { EXIT_PASS } else { EXIT_FAIL })
        }
        Err(e) => {
            eprintln!("error: {e}");
            let _ = emit(&config, &error_json(&config, &e));
            ExitCode::from(e.exit_code())
        }
    }
}
