//! Command-line front end.

mod metrics;
mod report;
mod reproduce;
mod svg;
mod validate;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::analytic::AnalyticError;
use crate::mc::{InterfererMode, McError, McSettings};
use crate::model::{builtin_scenario, load_config, AccessMode, ConfigError, NetworkConfig, ParamPath};

pub use metrics::{evaluate, EvalOptions, Metric};
pub use report::{format_sig9, write_csv, ReportRow, CSV_HEADER};
pub use reproduce::{
    column, epsilon_grid, figure_sweep, reproduce, table1_rows, ReproduceOutput, ReproduceTarget, Table1Row,
};
pub use svg::{bar_chart, line_plot, Series};
pub use validate::{laplace_probes, render_report, validation_checks, Check};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("{0}")]
    Validation(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) | CliError::Io { .. } => 1,
            CliError::Numeric(_) => 2,
            CliError::Validation(_) => 3,
        }
    }

    fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

impl From<AnalyticError> for CliError {
    fn from(e: AnalyticError) -> Self {
        match e.err_est() {
            Some(err) => CliError::Numeric(format!("{e} (err_est {err:e})")),
            None => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<McError> for CliError {
    fn from(e: McError) -> Self {
        match e {
            McError::InvalidSettings(msg) => CliError::Usage(msg),
            McError::Analytic(a) => a.into(),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "hetnet-duda", version, about = "Uplink DUDA/CUDA analysis of K-tier HetNets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate metrics of one scenario.
    Eval(EvalArgs),
    /// Sweep one scenario parameter.
    Sweep(SweepArgs),
    /// Regenerate the data and plot behind a table or figure.
    Reproduce(ReproduceArgs),
    /// Compare every analytic metric with the Monte Carlo oracle.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum ModeArg {
    Duda,
    CudaFading,
    CudaMean,
}

impl From<ModeArg> for AccessMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Duda => AccessMode::Duda,
            ModeArg::CudaFading => AccessMode::CudaFading,
            ModeArg::CudaMean => AccessMode::CudaMeanFading,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum InterfererArg {
    IndependentThinned,
    OnePerBs,
    SharedServingDistance,
}

impl From<InterfererArg> for InterfererMode {
    fn from(m: InterfererArg) -> Self {
        match m {
            InterfererArg::IndependentThinned => InterfererMode::IndependentThinned,
            InterfererArg::OnePerBs => InterfererMode::OnePerBs,
            InterfererArg::SharedServingDistance => InterfererMode::SharedServingDistance,
        }
    }
}

/// Monte Carlo settings shared by the commands that run the oracle.
#[derive(Debug, Clone, Args)]
pub struct McArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 100_000)]
    pub drops: u64,
    /// Simulation disc radius in metres [default: 10 / sqrt(min BS intensity)].
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long, value_enum, default_value = "independent_thinned")]
    pub interferers: InterfererArg,
    /// Clip UE transmit powers at the configured maximum.
    #[arg(long)]
    pub cap_power: bool,
}

impl McArgs {
    pub fn settings(&self, config: &NetworkConfig) -> McSettings {
        let mut s = McSettings::for_config(config, self.seed);
        if let Some(r) = self.radius {
            s.region_radius = r;
        }
        s.num_drops = self.drops;
        s.interferer_mode = self.interferers.into();
        s.apply_power_cap = self.cap_power;
        s
    }
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Scenario file or built-in name (table2_pico, table2_femto).
    #[arg(value_name = "CONFIG")]
    pub config_pos: Option<String>,
    /// Metric (same as --metric).
    #[arg(value_name = "METRIC")]
    pub metric_pos: Option<String>,
    #[arg(long, conflicts_with = "config_pos")]
    pub config: Option<String>,
    /// Access mode [default: the scenario's access_mode].
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Metrics: assoc, ue_per_bs, power, rate, se, ee, total_rate, total_se, total_ee, all.
    #[arg(long, value_delimiter = ',')]
    pub metric: Vec<String>,
    /// Restrict per-tier rows to one tier.
    #[arg(long)]
    pub tier: Option<usize>,
    #[arg(long)]
    pub include_static_power: bool,
    /// Report rates in bits instead of nats.
    #[arg(long)]
    pub bits: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also run the Monte Carlo oracle and fill the mc columns.
    #[arg(long)]
    pub mc: bool,
    #[command(flatten)]
    pub mc_args: McArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, default_value = "table2_pico")]
    pub config: String,
    /// Parameter path, e.g. `tier[0].epsilon`, `tier[*].epsilon`, `ue_intensity`.
    #[arg(long)]
    pub param: String,
    /// Comma-separated values or an inclusive `start:stop:step` range.
    #[arg(long)]
    pub values: String,
    #[arg(long, value_enum, value_delimiter = ',', default_values = ["duda", "cuda_fading", "cuda_mean"])]
    pub mode: Vec<ModeArg>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub metric: Vec<String>,
    #[arg(long)]
    pub tier: Option<usize>,
    #[arg(long)]
    pub include_static_power: bool,
    #[arg(long)]
    pub bits: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub mc: bool,
    #[command(flatten)]
    pub mc_args: McArgs,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    /// table1, fig2, fig3, fig4 or fig5.
    pub target: String,
    /// Output directory for `<target>.csv` and `<target>.svg`.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long)]
    pub bits: bool,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, default_value = "table2_pico")]
    pub config: String,
    /// Access mode [default: all three].
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long)]
    pub include_static_power: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub mc_args: McArgs,
}

/// Resolves a built-in scenario name or reads a scenario file. Returns the
/// scenario id used in reports.
pub fn load_scenario(arg: &str) -> Result<(String, NetworkConfig), CliError> {
    let arg = arg.trim();
    if arg.is_empty() {
        return Err(ConfigError::Io {
            path: String::new(),
            message: "empty scenario path".into(),
        }
        .into());
    }
    let path = Path::new(arg);
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or(arg).to_string();
    if !path.exists() {
        if let Some(config) = builtin_scenario(&stem) {
            return Ok((stem, config));
        }
    }
    let text = fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: arg.to_string(),
        message: e.to_string(),
    })?;
    Ok((stem, load_config(&text)?))
}

/// Parses `a,b,c` or an inclusive `start:stop:step` range; returns the
/// values sorted ascending without duplicates.
pub fn parse_values(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = |msg: String| CliError::Usage(format!("--values `{text}`: {msg}"));
    let parse = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| bad(format!("`{}` is not a number", s.trim())))
    };
    let mut values = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("range must be start:stop:step".into()));
        }
        let (start, stop, step) = (parse(parts[0])?, parse(parts[1])?, parse(parts[2])?);
        if !(step > 0.0) || stop < start {
            return Err(bad("range needs step > 0 and stop >= start".into()));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        (0..=n).map(|k| start + k as f64 * step).collect()
    } else {
        text.split(',')
            .filter(|s| !s.trim().is_empty())
            .map(parse)
            .collect::<Result<Vec<f64>, _>>()?
    };
    if values.is_empty() {
        return Err(bad("no values".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(bad("values must be finite".into()));
    }
    values.sort_by(f64::total_cmp);
    values.dedup();
    Ok(values)
}

fn parse_metrics(names: &[String]) -> Result<Vec<Metric>, CliError> {
    let mut out = Vec::new();
    for name in names {
        for m in Metric::parse_list(name)? {
            if !out.contains(&m) {
                out.push(m);
            }
        }
    }
    if out.is_empty() {
        return Err(CliError::Usage("empty metric list".into()));
    }
    Ok(out)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::io(path, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| CliError::io(Path::new("<stdout>"), e))
        }
    }
}

fn cmd_eval(args: &EvalArgs) -> Result<(), CliError> {
    let config_arg = args
        .config
        .as_deref()
        .or(args.config_pos.as_deref())
        .unwrap_or("table2_pico");
    let (scenario, config) = load_scenario(config_arg)?;
    let mut names = args.metric.clone();
    names.extend(args.metric_pos.clone());
    if names.is_empty() {
        names.push("all".into());
    }
    let metrics = parse_metrics(&names)?;
    let mode = args.mode.map(AccessMode::from).unwrap_or(config.access_mode());
    let opts = EvalOptions {
        tier: args.tier,
        include_static_power: args.include_static_power,
        bits: args.bits,
        mc: args.mc.then(|| args.mc_args.settings(&config)),
    };
    let rows = evaluate(&scenario, &config, mode, &metrics, &opts, None)?;
    emit(args.out.as_deref(), &write_csv(&rows))
}

/// One row set per `(value, mode)` grid point, ordered by value then mode.
pub fn sweep_rows(
    scenario: &str,
    config: &NetworkConfig,
    param: &ParamPath,
    values: &[f64],
    modes: &[AccessMode],
    metrics: &[Metric],
    opts: &EvalOptions,
) -> Result<Vec<ReportRow>, CliError> {
    use rayon::prelude::*;

    let mut modes = modes.to_vec();
    modes.sort();
    modes.dedup();
    let grid: Vec<(f64, AccessMode)> = values
        .iter()
        .flat_map(|&v| modes.iter().map(move |&m| (v, m)))
        .collect();
    let blocks: Vec<Result<Vec<ReportRow>, CliError>> = grid
        .par_iter()
        .map(|&(value, mode)| {
            let point = param.apply(config, value)?;
            evaluate(scenario, &point, mode, metrics, opts, Some((param.to_string(), value)))
        })
        .collect();
    let mut rows = Vec::new();
    for block in blocks {
        rows.extend(block?);
    }
    Ok(rows)
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), CliError> {
    let (scenario, config) = load_scenario(&args.config)?;
    let param: ParamPath = args.param.parse()?;
    let values = parse_values(&args.values)?;
    let metrics = parse_metrics(&args.metric)?;
    let modes: Vec<AccessMode> = args.mode.iter().map(|&m| m.into()).collect();
    let opts = EvalOptions {
        tier: args.tier,
        include_static_power: args.include_static_power,
        bits: args.bits,
        mc: args.mc.then(|| args.mc_args.settings(&config)),
    };
    let rows = sweep_rows(&scenario, &config, &param, &values, &modes, &metrics, &opts)?;
    emit(args.out.as_deref(), &write_csv(&rows))
}

fn cmd_reproduce(args: &ReproduceArgs) -> Result<(), CliError> {
    let target: ReproduceTarget = args.target.parse()?;
    fs::create_dir_all(&args.out).map_err(|e| CliError::io(&args.out, e))?;
    let output = reproduce(target, args.bits)?;
    let csv_path = args.out.join(format!("{}.csv", target.as_str()));
    let svg_path = args.out.join(format!("{}.svg", target.as_str()));
    fs::write(&csv_path, &output.csv).map_err(|e| CliError::io(&csv_path, e))?;
    fs::write(&svg_path, &output.svg).map_err(|e| CliError::io(&svg_path, e))?;
    emit(None, &output.summary)?;
    if output.failed {
        return Err(CliError::Validation(format!("{} comparison failed", target.as_str())));
    }
    Ok(())
}

fn cmd_validate(args: &ValidateArgs) -> Result<(), CliError> {
    let (scenario, config) = load_scenario(&args.config)?;
    let settings = args.mc_args.settings(&config);
    settings.validate()?;
    let modes: Vec<AccessMode> = match args.mode {
        Some(m) => vec![m.into()],
        None => AccessMode::ALL.to_vec(),
    };
    let static_power = args.include_static_power.then(|| config.ue_static_power());
    let mut checks = Vec::new();
    for mode in modes {
        checks.extend(validation_checks(&config, mode, &settings, static_power)?);
    }
    let text = render_report(&scenario, &settings, &checks);
    emit(None, &text)?;
    if let Some(path) = &args.out {
        fs::write(path, &text).map_err(|e| CliError::io(path, e))?;
    }
    let failed = checks.iter().filter(|c| !c.passed()).count();
    if failed > 0 {
        return Err(CliError::Validation(format!(
            "{failed} of {} checks failed",
            checks.len()
        )));
    }
    Ok(())
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Eval(a) => cmd_eval(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Reproduce(a) => cmd_reproduce(a),
        Command::Validate(a) => cmd_validate(a),
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
