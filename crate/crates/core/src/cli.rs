//! Command-line front end: `analyze`, `cdf`, `mc` and `resources`.
//!
//! Every command writes a JSON report (to `--output` or stdout) that embeds
//! the fully resolved configuration. Floating point values are rounded to
//! 12 significant digits. Exit codes: 0 success, 1 internal failure,
//! 2 configuration or schema error, 3 size-guard rejection.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::distributions::{Asset, LatentGrid, Portfolio, DEFAULT_Z_MAX};
use crate::error::Error;
use crate::model::LoadingMode;
use crate::qae::{estimate_cdf_point, MAX_QUBITS};
use crate::resources::{estimate, ResourceParams};
use crate::risk::{
    discretization_error_bound, exact_loss_distribution, expected_loss, expected_loss_continuous,
    loglog_slope, mc_convergence, mc_simulate_partitioned, var_bisection_qae_sampled, var_exact,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SIZE: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "qae-credit",
    version,
    about = "Quantum amplitude estimation for credit-risk VaR"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Expected loss, VaR and economic capital by amplitude-estimated bisection.
    Analyze(AnalyzeArgs),
    /// Amplitude-estimated CDF at a single loss level.
    Cdf(CdfArgs),
    /// Classical Monte Carlo baseline.
    Mc(McArgs),
    /// Fault-tolerant depth and runtime estimate.
    Resources(ResourceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Independent,
    Gci,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Linear,
    Exact,
}

impl From<ModeArg> for LoadingMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Linear => LoadingMode::Linear,
            ModeArg::Exact => LoadingMode::Exact,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ModelArgs {
    /// JSON portfolio: {"assets": [{"lgd": int, "pd0": float, "rho": float}, ...]}.
    #[arg(long)]
    pub portfolio: PathBuf,
    #[arg(long, value_enum, default_value_t = ModelKind::Gci)]
    pub model: ModelKind,
    /// Latent-factor qubits (GCI model only).
    #[arg(long, default_value_t = 2)]
    pub n_z: usize,
    /// Truncation of the latent factor in standard deviations.
    #[arg(long, default_value_t = DEFAULT_Z_MAX)]
    pub z_max: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct QaeArgs {
    /// Evaluation qubits.
    #[arg(long, default_value_t = 4)]
    pub m: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Linear)]
    pub mode: ModeArg,
    /// Sample the QAE outcome this many times instead of reading the exact distribution.
    #[arg(long)]
    pub shots: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub qae: QaeArgs,
    /// Confidence level.
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// CSV side file with columns x, exact_cdf, qae_estimate, bound.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CdfArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub qae: QaeArgs,
    /// Loss level x in ℙ[loss ≤ x].
    #[arg(long)]
    pub threshold: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct McArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Independent random streams; output depends on (seed, partitions).
    #[arg(long, default_value_t = 1)]
    pub partitions: usize,
    /// Comma-separated sample sizes for a convergence table, e.g. 100,1000,10000.
    #[arg(long, value_delimiter = ',')]
    pub sweep: Option<Vec<usize>>,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    /// Loss level for the convergence table; defaults to the exact VaR.
    #[arg(long)]
    pub threshold: Option<u64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ResourceArgs {
    /// Number of assets.
    #[arg(long)]
    pub k: u64,
    #[arg(long, default_value_t = 10)]
    pub n_z: u32,
    #[arg(long, default_value_t = 30)]
    pub n_s: u32,
    #[arg(long, default_value_t = 10)]
    pub m: u32,
    #[arg(long, default_value_t = 2f64.powi(-10))]
    pub epsilon: f64,
    /// Seconds per T/Toffoli layer.
    #[arg(long, default_value_t = 1e-4)]
    pub gate_time: f64,
    #[arg(long)]
    pub qft_free: bool,
    /// Copies of the latent register (defaults to K).
    #[arg(long)]
    pub w: Option<u64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// A command failure carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Validation { .. } => EXIT_CONFIG,
            Error::SizeGuard { .. } => EXIT_SIZE,
            _ => EXIT_INTERNAL,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

fn config_error(message: impl Into<String>) -> CliError {
    CliError {
        code: EXIT_CONFIG,
        message: message.into(),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PortfolioFile {
    assets: Vec<AssetRecord>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AssetRecord {
    lgd: i64,
    pd0: f64,
    #[serde(default)]
    rho: f64,
}

/// Parses and validates a portfolio document.
pub fn parse_portfolio(text: &str) -> Result<Portfolio, CliError> {
    let file: PortfolioFile =
        serde_json::from_str(text).map_err(|e| config_error(format!("portfolio: {e}")))?;
    let mut assets = Vec::with_capacity(file.assets.len());
    for (k, a) in file.assets.iter().enumerate() {
        if a.lgd < 1 {
            return Err(config_error(format!(
                "invalid assets[{k}].lgd: {} must be a positive integer",
                a.lgd
            )));
        }
        assets.push(Asset {
            lgd: a.lgd as u64,
            pd0: a.pd0,
            rho: a.rho,
        });
    }
    Ok(Portfolio::new(assets)?)
}

pub fn load_portfolio(path: &Path) -> Result<Portfolio, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
    parse_portfolio(&text)
}

fn check_alpha(alpha: f64) -> Result<(), CliError> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(config_error(format!(
            "invalid alpha: {alpha} is not in (0, 1]"
        )));
    }
    Ok(())
}

struct Model {
    portfolio: Portfolio,
    grid: Option<LatentGrid>,
}

impl ModelArgs {
    fn resolve(&self) -> Result<Model, CliError> {
        let portfolio = load_portfolio(&self.portfolio)?;
        let grid = match self.model {
            ModelKind::Independent => None,
            ModelKind::Gci => Some(LatentGrid::new(self.n_z, self.z_max)?),
        };
        Ok(Model { portfolio, grid })
    }
}

impl Model {
    fn n_z(&self) -> usize {
        self.grid.as_ref().map_or(0, |g| g.n_z())
    }

    fn state_qubits(&self) -> usize {
        self.n_z() + self.portfolio.len() + self.portfolio.n_sum_qubits() + 1
    }

    /// Rejects circuits the statevector engine cannot hold before any work.
    fn guard(&self, m: usize) -> Result<Value, CliError> {
        let state = self.state_qubits();
        let total = state + m + 1;
        if total > MAX_QUBITS {
            return Err(Error::SizeGuard {
                what: "statevector simulation".into(),
                required: total,
                limit: MAX_QUBITS,
            }
            .into());
        }
        Ok(json!({"state": state, "evaluation": m, "ancilla": 1, "total": total}))
    }

    fn expected_loss_block(&self) -> Result<Value, CliError> {
        let el = expected_loss(&self.portfolio, self.grid.as_ref())?;
        Ok(match &self.grid {
            None => json!({"value": el}),
            Some(g) => json!({
                "value": el,
                "continuous": expected_loss_continuous(&self.portfolio, 1_000_001)?,
                "discretization_bound": discretization_error_bound(&self.portfolio, g)?,
            }),
        })
    }
}

/// Rounds every float in `v` to 12 significant digits.
fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or_default();
            let r: f64 = format!("{x:.11e}").parse().unwrap_or(x);
            *v = serde_json::Number::from_f64(r).map_or(Value::Null, Value::Number);
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

fn fmt12(x: f64) -> String {
    let r: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    format!("{r}")
}

fn emit(mut report: Value, output: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    round_floats(&mut report);
    let mut text = serde_json::to_string_pretty(&report).map_err(|e| CliError {
        code: EXIT_INTERNAL,
        message: e.to_string(),
    })?;
    text.push('\n');
    let io_err = |e: std::io::Error| CliError {
        code: EXIT_INTERNAL,
        message: e.to_string(),
    };
    match output {
        Some(path) => fs::write(path, text).map_err(io_err),
        None => out.write_all(text.as_bytes()).map_err(io_err),
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).unwrap_or(Value::Null)
}

pub fn cmd_analyze(args: &AnalyzeArgs, out: &mut dyn Write) -> Result<(), CliError> {
    check_alpha(args.alpha)?;
    let model = args.model.resolve()?;
    let qubits = model.guard(args.qae.m)?;
    let grid = model.grid.as_ref();
    let mode = args.qae.mode.into();

    let dist = exact_loss_distribution(&model.portfolio, grid)?;
    let exact_var = var_exact(&dist, args.alpha)?;
    let report = var_bisection_qae_sampled(
        &model.portfolio,
        grid,
        args.alpha,
        args.qae.m,
        mode,
        args.qae.shots,
        args.qae.seed,
    )?;

    let mut table = Vec::new();
    for (x, exact) in dist.cdf().into_iter().enumerate() {
        let point = estimate_cdf_point(
            &model.portfolio,
            grid,
            x as u64,
            args.qae.m,
            mode,
            args.qae.shots,
            args.qae.seed,
        )?;
        table.push((x, exact, point.estimate, point.qae.error_bound));
    }
    if let Some(path) = &args.csv {
        let mut csv = String::from("x,exact_cdf,qae_estimate,bound\n");
        for (x, exact, est, bound) in &table {
            csv.push_str(&format!(
                "{x},{},{},{}\n",
                fmt12(*exact),
                fmt12(*est),
                fmt12(*bound)
            ));
        }
        fs::write(path, csv).map_err(|e| CliError {
            code: EXIT_INTERNAL,
            message: e.to_string(),
        })?;
    }

    let value = json!({
        "command": "analyze",
        "config": to_value(args),
        "qubits": qubits,
        "expected_loss": model.expected_loss_block()?,
        "var": report.var,
        "ecr": report.ecr,
        "exact_var": exact_var,
        "exact_ecr": exact_var as f64 - report.expected_loss,
        "probes": report.probes(),
        "non_monotone": report.non_monotone,
        "bisection": to_value(&report.trace),
        "cdf": table.iter().map(|(x, exact, est, bound)| json!({
            "x": x, "exact_cdf": exact, "qae_estimate": est, "bound": bound,
        })).collect::<Vec<_>>(),
    });
    emit(value, args.output.as_deref(), out)
}

pub fn cmd_cdf(args: &CdfArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let model = args.model.resolve()?;
    let qubits = model.guard(args.qae.m)?;
    let grid = model.grid.as_ref();
    let exact = exact_loss_distribution(&model.portfolio, grid)?.cdf_at(args.threshold);
    let point = estimate_cdf_point(
        &model.portfolio,
        grid,
        args.threshold,
        args.qae.m,
        args.qae.mode.into(),
        args.qae.shots,
        args.qae.seed,
    )?;
    let value = json!({
        "command": "cdf",
        "config": to_value(args),
        "qubits": qubits,
        "threshold": args.threshold,
        "estimate": point.estimate,
        "exact_cdf": exact,
        "bound": point.qae.error_bound,
        "outcome_probs": point.qae.outcome_probs,
    });
    emit(value, args.output.as_deref(), out)
}

pub fn cmd_mc(args: &McArgs, out: &mut dyn Write) -> Result<(), CliError> {
    check_alpha(args.alpha)?;
    if args.samples == 0 {
        return Err(config_error("invalid samples: must be positive"));
    }
    let model = args.model.resolve()?;
    let grid = model.grid.as_ref();
    let exact = exact_loss_distribution(&model.portfolio, grid)?;
    let exact_var = var_exact(&exact, args.alpha)?;
    let (dist, report) = mc_simulate_partitioned(
        &model.portfolio,
        grid,
        args.alpha,
        args.samples,
        args.seed,
        args.partitions,
    )?;
    let mut value = json!({
        "command": "mc",
        "config": to_value(args),
        "expected_loss": model.expected_loss_block()?,
        "var": report.var,
        "ecr": report.ecr,
        "exact_var": exact_var,
        "distribution": dist.probs(),
    });
    if let Some(sizes) = &args.sweep {
        if sizes.is_empty() || sizes.contains(&0) || args.trials < 2 {
            return Err(config_error(
                "invalid sweep: need positive sizes and at least two trials",
            ));
        }
        let threshold = args.threshold.unwrap_or(exact_var);
        let rows = mc_convergence(
            &model.portfolio,
            grid,
            threshold,
            sizes,
            args.trials,
            args.seed,
        )?;
        value["convergence"] = json!({
            "threshold": threshold,
            "rows": to_value(&rows),
            "loglog_slope": if rows.len() > 1 { json!(loglog_slope(&rows)) } else { Value::Null },
        });
    }
    emit(value, args.output.as_deref(), out)
}

pub fn cmd_resources(args: &ResourceArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let params = ResourceParams {
        k: args.k,
        n_z: args.n_z,
        n_s: args.n_s,
        m: args.m,
        epsilon: args.epsilon,
        gate_time_s: args.gate_time,
        qft_free_halving: args.qft_free,
        w: args.w,
    };
    let report = estimate(&params)?;
    let value = json!({
        "command": "resources",
        "config": to_value(args),
        "report": to_value(&report),
        "runtime_hours": report.runtime_s / 3600.0,
        "runtime_minutes": report.runtime_s / 60.0,
    });
    emit(value, args.output.as_deref(), out)
}

/// Parses `argv`, runs the command and returns the process exit code.
/// Reports go to `out` unless `--output` is given; diagnostics go to `err`.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let result = match &cli.command {
        Command::Analyze(a) => cmd_analyze(a, out),
        Command::Cdf(a) => cmd_cdf(a, out),
        Command::Mc(a) => cmd_mc(a, out),
        Command::Resources(a) => cmd_resources(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_lgd_names_the_field() {
        let e = parse_portfolio(r#"{"assets": [{"lgd": 1, "pd0": 0.1, "rho": 0.1}, {"lgd": -2, "pd0": 0.1, "rho": 0.1}]}"#)
            .unwrap_err();
        assert_eq!(e.code, EXIT_CONFIG);
        assert!(e.message.contains("assets[1].lgd"), "{}", e.message);
    }

    #[test]
    fn bad_probability_names_the_field() {
        let e = parse_portfolio(r#"{"assets": [{"lgd": 1, "pd0": 1.5}]}"#).unwrap_err();
        assert_eq!(e.code, EXIT_CONFIG);
        assert!(e.message.contains("assets[0].pd0"), "{}", e.message);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let e = parse_portfolio(r#"{"assets": [{"lgd": 1, "pd0": 0.1, "beta": 2}]}"#).unwrap_err();
        assert_eq!(e.code, EXIT_CONFIG);
    }

    #[test]
    fn floats_round_to_twelve_digits() {
        let mut v = json!({"a": [0.1234567890123456, 1.0], "b": 3});
        round_floats(&mut v);
        assert_eq!(v, json!({"a": [0.123456789012, 1.0], "b": 3}));
    }
}
