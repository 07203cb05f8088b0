mod config;
mod report;

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use ramansim_core::protocol::{feasibility_report, sweep, Metric};
use ramansim_core::{dynamics, run_protocol, Detection, ExperimentPreset};

use config::{Format, Overrides, RunConfigFile};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
}

impl CliError {
    fn category(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Numerical(_) => "numerical",
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Numerical(m) => m,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} error: {}", self.category(), self.message())
    }
}

impl From<ramansim_core::Error> for CliError {
    fn from(e: ramansim_core::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

#[derive(Parser)]
#[command(name = "ramansim", version, about = "Atom-to-cat-qubit transfer via degenerate Raman interaction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one protocol instance and report the transferred cat qubit.
    Run(CommonArgs),
    /// Evaluate metrics over a parameter grid.
    Sweep(SweepArgs),
    /// Print the validity margins of the effective model.
    Validate(CommonArgs),
    /// Print overlap orders and timing checks for the experimental preset.
    Feasibility(CommonArgs),
    /// Print the built-in experimental preset.
    Presets(CommonArgs),
}

#[derive(Args, Debug, Clone, Default)]
struct CommonArgs {
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    outcome: Option<Detection>,
    /// Coherent amplitude, e.g. `3` or `2+1i`.
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<Complex64>,
    /// Ground-state amplitude of the atomic qubit.
    #[arg(long, allow_hyphen_values = true)]
    cg: Option<Complex64>,
    /// Excited-state amplitude of the atomic qubit.
    #[arg(long, allow_hyphen_values = true)]
    ce: Option<Complex64>,
    /// Atom-field coupling in kHz.
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    /// Detuning in kHz.
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<f64>,
    /// Interaction time in ms.
    #[arg(long, allow_hyphen_values = true)]
    t: Option<f64>,
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Significant digits after the decimal point in scientific notation.
    #[arg(long)]
    precision: Option<usize>,
    /// Also evolve under the three-level Hamiltonian and report the deviation.
    #[arg(long)]
    with_full_model: bool,
}

#[derive(Args, Debug, Clone)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated metric names.
    #[arg(long, value_delimiter = ',')]
    metrics: Option<Vec<Metric>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    grid_alpha: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    grid_delta: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    grid_lambda: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    grid_t: Option<Vec<f64>>,
}

fn load(args: &CommonArgs, metrics: Option<Vec<Metric>>) -> Result<config::Resolved, CliError> {
    let file = match &args.config {
        Some(path) => RunConfigFile::load(path)?,
        None => RunConfigFile::default(),
    };
    let flags = Overrides {
        c_g: args.cg,
        c_e: args.ce,
        alpha: args.alpha,
        lambda: args.lambda,
        delta: args.delta,
        t: args.t,
        n_max: args.n_max,
        outcome: args.outcome,
        with_full_model: args.with_full_model,
        format: args.format,
        out: args.out.clone(),
        precision: args.precision,
        metrics,
    };
    config::resolve(file, flags)
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).map_err(|e| CliError::Config(e.to_string()))
        }
    }
}

fn echo_defaults(defaults: &[config::DefaultEcho]) {
    for d in defaults {
        eprintln!("default {} = {} ({})", d.name, d.value, d.rule);
    }
}

fn cmd_run(args: &CommonArgs) -> Result<(), CliError> {
    let cfg = load(args, None)?;
    let result = run_protocol(&cfg.protocol)?;
    if let Some(w) = &result.regime_warning {
        eprintln!("warning: {w}");
    }
    let text = match cfg.format.unwrap_or(Format::Json) {
        Format::Json => report::run_json(&cfg, &result),
        Format::Csv => {
            echo_defaults(&cfg.defaults);
            report::run_csv(&result, cfg.precision)?
        }
    };
    emit(&text, cfg.out.as_ref())
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), CliError> {
    let mut cfg = load(&args.common, args.metrics.clone())?;
    for (axis, flag) in [
        (&mut cfg.grid.alpha, &args.grid_alpha),
        (&mut cfg.grid.delta, &args.grid_delta),
        (&mut cfg.grid.lambda, &args.grid_lambda),
        (&mut cfg.grid.t, &args.grid_t),
    ] {
        if let Some(values) = flag {
            axis.clone_from(values);
        }
    }
    config::check_cutoff_cap(&cfg.protocol, &cfg.grid)?;
    let grid = &cfg.grid;
    cfg.defaults.retain(|d| match d.name {
        "alpha" => grid.alpha.is_empty(),
        "delta" => grid.delta.is_empty(),
        "lambda" => grid.lambda.is_empty(),
        "t" | "n_max" => grid.t.is_empty() && grid.alpha.is_empty() && grid.delta.is_empty() && grid.lambda.is_empty(),
        _ => true,
    });
    let table = sweep(&cfg.protocol, &cfg.grid, &cfg.metrics)?;
    for w in &table.warnings {
        eprintln!("warning: {w}");
    }
    for row in &table.rows {
        if let Some(e) = &row.error {
            eprintln!("warning: point alpha={} delta={} lambda={}: {e}", row.point.alpha, row.point.delta, row.point.lambda);
        }
    }
    let text = match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            echo_defaults(&cfg.defaults);
            report::sweep_csv(&cfg, &table)?
        }
        Format::Json => report::sweep_json(&cfg, &table),
    };
    emit(&text, cfg.out.as_ref())
}

fn cmd_validate(args: &CommonArgs) -> Result<(), CliError> {
    let cfg = load(args, None)?;
    let t = cfg.interaction_time()?;
    let margins = dynamics::check_validity(&cfg.protocol.params, t)?;
    let text = match cfg.format {
        None => report::validate_text(&cfg, t, &margins),
        Some(Format::Json) => report::validate_json(&cfg, t, &margins),
        Some(Format::Csv) => report::validate_csv(&cfg, t, &margins)?,
    };
    emit(&text, cfg.out.as_ref())
}

fn preset_from(args: &CommonArgs) -> Result<ExperimentPreset, CliError> {
    let mut preset = ExperimentPreset::default();
    if args.config.is_some() || args.lambda.is_some() || args.delta.is_some() {
        let cfg = load(args, None)?;
        preset.lambda_coupling = cfg.protocol.params.lambda_coupling();
        preset.delta = cfg.protocol.params.delta();
    }
    Ok(preset)
}

fn cmd_feasibility(args: &CommonArgs) -> Result<(), CliError> {
    let preset = preset_from(args)?;
    let feasibility = feasibility_report(&preset)?;
    let precision = args.precision.unwrap_or(config::DEFAULT_PRECISION);
    let text = match args.format {
        None => report::feasibility_text(&feasibility, precision),
        Some(Format::Json) => report::to_json(&feasibility),
        Some(Format::Csv) => report::feasibility_csv(&feasibility, precision)?,
    };
    emit(&text, args.out.as_ref())
}

fn cmd_presets(args: &CommonArgs) -> Result<(), CliError> {
    let preset = preset_from(args)?;
    emit(&report::to_json(&preset), args.out.as_ref())
}

fn report_error(e: &CliError) -> ExitCode {
    let body = serde_json::json!({ "error": e.category(), "message": e.message() });
    eprintln!("{body}");
    ExitCode::from(e.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => return report_error(&CliError::Config(e.to_string().trim_end().to_owned())),
    };
    let outcome = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Validate(args) => cmd_validate(args),
        Command::Feasibility(args) => cmd_feasibility(args),
        Command::Presets(args) => cmd_presets(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report_error(&e),
    }
}
