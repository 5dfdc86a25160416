//! Command-line front end: configuration files, sweeps, figure presets and
//! CSV output.

pub mod config;
pub mod output;
pub mod presets;
pub mod sweep;

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{parse_config, parse_kmax, ConfigError, SolverChoice, SweepConfig};
use floquet_junction::KmaxPolicy;

/// Largest tolerated deviation from the analytic current, in units of `γ`.
pub const ANALYTIC_THRESHOLD: f64 = 1e-3;

pub const EXIT_NUMERICAL: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "fjunction", version, about = "Steady-state currents through a driven single-site junction")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the sweep described by a configuration file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Compare an undriven sweep with the rate-equation current.
    CompareAnalytic {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run a built-in figure sweep (fig2a, fig2b, fig3, fig4).
    Preset {
        name: String,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    /// Output CSV path; stdout when neither this nor the config sets one.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Two-column plot data companion file.
    #[arg(long)]
    pub plot_data: Option<PathBuf>,
    /// fourier-space, time-propagation, monodromy or cross-check.
    #[arg(long)]
    pub solver: Option<String>,
    /// Harmonic cutoff: an integer or "adaptive".
    #[arg(long)]
    pub kmax: Option<String>,
    /// Worker threads (default: number of processors).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Convergence tolerance of the adaptive cutoff, in units of γ.
    #[arg(long)]
    pub tol: Option<f64>,
}

fn config_error(e: impl std::fmt::Display) -> ExitCode {
    eprintln!("configuration error: {e}");
    ExitCode::from(EXIT_CONFIG)
}

/// Applies command-line overrides on top of a configuration.
pub fn apply_overrides(cfg: &mut SweepConfig, args: &CommonArgs) -> Result<(), ConfigError> {
    if let Some(s) = &args.solver {
        cfg.solver = SolverChoice::parse(s).ok_or_else(|| ConfigError {
            line: None,
            message: format!("unknown solver '{s}'"),
        })?;
    }
    let tol = match (&cfg.kmax, args.tol) {
        (_, Some(t)) => t,
        (KmaxPolicy::Adaptive { tol, .. }, None) => *tol,
        _ => 1e-2,
    };
    if let Some(k) = &args.kmax {
        cfg.kmax = parse_kmax(k, tol).ok_or_else(|| ConfigError {
            line: None,
            message: format!("invalid --kmax '{k}'"),
        })?;
    } else if let KmaxPolicy::Adaptive { tol: t, .. } = &mut cfg.kmax {
        *t = tol;
    }
    if let Some(p) = &args.out {
        cfg.output.path = Some(p.clone());
    }
    if let Some(p) = &args.plot_data {
        cfg.output.plot_data = Some(p.clone());
    }
    if args.workers == Some(0) {
        return Err(ConfigError {
            line: None,
            message: "--workers must be positive".into(),
        });
    }
    cfg.validate()
}

fn load(path: &PathBuf) -> Result<SweepConfig, String> {
    let src = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_config(&src).map_err(|e| format!("{}: {e}", path.display()))
}

fn emit(cfg: &SweepConfig, rows: &[sweep::Row]) -> io::Result<()> {
    match &cfg.output.path {
        Some(p) => output::write_csv_file(rows, p, cfg.output.rescaled_bias)?,
        None => output::write_csv(rows, io::stdout().lock(), cfg.output.rescaled_bias).map_err(io::Error::other)?,
    }
    if let Some(p) = &cfg.output.plot_data {
        output::write_plot_data_file(rows, p)?;
    }
    Ok(())
}

fn run_sweep_command(mut cfg: SweepConfig, args: &CommonArgs) -> ExitCode {
    if let Err(e) = apply_overrides(&mut cfg, args) {
        return config_error(e);
    }
    let rows = sweep::run_sweep(&cfg, args.workers);
    if let Err(e) = emit(&cfg, &rows) {
        eprintln!("output error: {e}");
        return ExitCode::from(EXIT_NUMERICAL);
    }
    let failed = rows.iter().filter(|r| r.status.is_error()).count();
    if failed > 0 {
        eprintln!("{failed} of {} points failed", rows.len());
        return ExitCode::from(EXIT_NUMERICAL);
    }
    ExitCode::SUCCESS
}

fn run_compare(mut cfg: SweepConfig, args: &CommonArgs) -> ExitCode {
    if let Err(e) = apply_overrides(&mut cfg, args) {
        return config_error(e);
    }
    let report = match sweep::compare_analytic(&cfg, args.workers) {
        Ok(r) => r,
        Err(e) => return config_error(e),
    };
    let mut out = io::stdout().lock();
    let edges = report.points.iter().filter(|p| p.on_edge).count();
    for p in report.points.iter().filter(|p| p.on_edge) {
        eprintln!(
            "warning: delta_mu = {} at T = 0 sits on a Fermi edge; excluded from the maximum",
            p.params.delta_mu
        );
    }
    for p in report.points.iter().filter(|p| p.error.is_some()) {
        eprintln!("delta_mu = {}: {}", p.params.delta_mu, p.error.as_deref().unwrap_or(""));
    }
    let max = report.max_deviation();
    let _ = writeln!(
        out,
        "max |I_R - I_R(analytic)| / gamma = {max:e} over {} points ({edges} edge points excluded, threshold {ANALYTIC_THRESHOLD:e})",
        report.points.len() - edges
    );
    if let Some(path) = &cfg.output.path {
        let write = || -> csv::Result<()> {
            let mut w = csv::Writer::from_path(path)?;
            w.write_record(["delta_mu", "temperature", "I_R_over_gamma", "analytic_over_gamma", "deviation", "edge"])?;
            for p in &report.points {
                w.write_record([
                    p.params.delta_mu.to_string(),
                    p.params.temperature_left.to_string(),
                    p.numeric_over_gamma.to_string(),
                    p.analytic_over_gamma.to_string(),
                    p.deviation().to_string(),
                    p.on_edge.to_string(),
                ])?;
            }
            w.flush()?;
            Ok(())
        };
        if let Err(e) = write() {
            eprintln!("output error: {e}");
            return ExitCode::from(EXIT_NUMERICAL);
        }
    }
    if report.failures() > 0 || !(max < ANALYTIC_THRESHOLD) {
        ExitCode::from(EXIT_NUMERICAL)
    } else {
        ExitCode::SUCCESS
    }
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> ExitCode {
    match cli.command {
        Command::Sweep { config, common } => match load(&config) {
            Ok(cfg) => run_sweep_command(cfg, &common),
            Err(e) => config_error(e),
        },
        Command::CompareAnalytic { config, common } => match load(&config) {
            Ok(cfg) => run_compare(cfg, &common),
            Err(e) => config_error(e),
        },
        Command::Preset { name, common } => match presets::by_name(&name) {
            Some(cfg) => run_sweep_command(cfg, &common),
            None => config_error(format!("unknown preset '{name}' (expected one of {})", presets::NAMES.join(", "))),
        },
    }
}
