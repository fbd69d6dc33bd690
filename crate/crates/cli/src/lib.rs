//! `lcouple`: runs coupled-estimator sweeps from TOML configs and writes
//! CSV/JSON results.
//!
//! Worker count comes from `LCOUPLE_WORKERS` (defaults to all cores).

pub mod config;
pub mod error;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use langevin_coupling::checks::{run_checks, CheckLevel};
use langevin_coupling::estimators::{
    eta_sweep_with_progress, linear_response_fit, ExperimentResult,
};
use langevin_coupling::oracles::{gaussian_tv_isotropic, ou_stationary, tv_from_distance};

pub use config::{Experiment, ExperimentConfig, ForcingKey, ModelConfig, ObservableConfig};
pub use error::{CliError, Result};

pub const WORKERS_ENV: &str = "LCOUPLE_WORKERS";

#[derive(Debug, Parser)]
#[command(
    name = "lcouple",
    version,
    about = "Coupled estimators of transport coefficients"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an eta sweep from a config file or bundled config name.
    Run {
        config: String,
        /// Overrides `output_dir` from the config.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Run the invariant suites.
    Check {
        #[arg(long, value_enum, default_value_t = Level::Fast)]
        level: Level,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
    /// Print closed-form reference values.
    Oracle {
        #[command(subcommand)]
        which: Oracle,
    },
    /// Print a bundled config to stdout.
    ShowConfig { name: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Level {
    Fast,
    Full,
}

#[derive(Debug, Subcommand)]
pub enum Oracle {
    /// Stationary covariance of the sheared Ornstein-Uhlenbeck process.
    Ou {
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        eta: f64,
    },
    /// Total variation between N(mu1, sigma² I) and N(mu2, sigma² I).
    Tv {
        /// Comma-separated mean; needs --mu2.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        mu1: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        mu2: Option<Vec<f64>>,
        /// Distance |mu1 - mu2|, instead of the means.
        #[arg(long)]
        distance: Option<f64>,
        #[arg(long)]
        sigma: f64,
    },
}

/// Parses `args` and executes the command; returns the process exit status.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command, stdout) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Result<u8> {
    match command {
        Command::Run { config, output_dir } => {
            configure_workers()?;
            cmd_run(&config, output_dir, out)
        }
        Command::Check { level, seed } => {
            configure_workers()?;
            cmd_check(level, seed, out)
        }
        Command::Oracle { which } => cmd_oracle(which, out),
        Command::ShowConfig { name } => match config::bundled(&name) {
            Some(text) => {
                write!(out, "{text}").map_err(stdout_err)?;
                Ok(0)
            }
            None => Err(CliError::config(format!("no bundled config named {name}"))),
        },
    }
}

fn stdout_err(e: std::io::Error) -> CliError {
    CliError::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    }
}

fn configure_workers() -> Result<()> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|n| *n >= 1).ok_or_else(|| {
        CliError::config(format!(
            "{WORKERS_ENV} must be a positive integer, got {raw:?}"
        ))
    })?;
    // A second call in the same process (tests) keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

pub fn cmd_run(source: &str, output_dir: Option<PathBuf>, out: &mut dyn Write) -> Result<u8> {
    let cfg = ExperimentConfig::load(source)?;
    let exp = cfg.build()?;
    let dir = output_dir.unwrap_or_else(|| cfg.output_dir.clone());
    let mut cfg_echo = cfg.clone();
    cfg_echo.output_dir = dir.clone();
    eprintln!(
        "running {} kinds x {} etas x {} replicas, {} steps each",
        cfg.kinds.len(),
        cfg.etas.len(),
        cfg.replicas,
        cfg.n_steps
    );
    let cells = eta_sweep_with_progress(
        &cfg.kinds,
        &exp.model,
        &exp.observable,
        &cfg.etas,
        cfg.replicas,
        &exp.params,
        &exp.options,
        |c| {
            eprintln!(
                "  {} eta={} alpha_hat={:.6} se={:.3e} blowups={} {}",
                c.kind,
                c.eta,
                c.alpha_hat,
                c.se,
                c.blowups,
                output::cell_status(c)
            )
        },
    )?;
    let files = output::write_all(&dir, &cfg_echo, &cells)?;
    for f in &files {
        writeln!(out, "file={}", f.display()).map_err(stdout_err)?;
    }
    print_fits(&cfg, &cells, out)?;
    let invalid = cells.iter().filter(|c| !c.valid).count();
    if invalid > 0 {
        eprintln!("{invalid} cells invalid (too many blow-ups)");
        return Ok(1);
    }
    Ok(0)
}

/// Linear-response slope per kind over the valid cells.
fn print_fits(
    cfg: &ExperimentConfig,
    cells: &[ExperimentResult],
    out: &mut dyn Write,
) -> Result<()> {
    for kind in &cfg.kinds {
        let valid: Vec<&ExperimentResult> = cells
            .iter()
            .filter(|c| c.kind == *kind && c.valid)
            .collect();
        if valid.is_empty() {
            continue;
        }
        let etas: Vec<f64> = valid.iter().map(|c| c.eta).collect();
        let alphas: Vec<f64> = valid.iter().map(|c| c.alpha_hat).collect();
        let ses: Vec<f64> = valid.iter().map(|c| c.se).collect();
        let fit = linear_response_fit(&etas, &alphas, &ses)?;
        writeln!(
            out,
            "fit kind={kind} slope={} stderr={}",
            output::fmt_num(fit.slope),
            output::fmt_num(fit.stderr)
        )
        .map_err(stdout_err)?;
    }
    Ok(())
}

pub fn cmd_check(level: Level, seed: u64, out: &mut dyn Write) -> Result<u8> {
    let level = match level {
        Level::Fast => CheckLevel::Fast,
        Level::Full => CheckLevel::Full,
    };
    let outcomes = run_checks(level, seed)?;
    let mut failed = 0;
    for o in &outcomes {
        let tag = if o.passed { "PASS" } else { "FAIL" };
        writeln!(out, "{tag} {}: {}", o.name, o.detail).map_err(stdout_err)?;
        failed += (!o.passed) as usize;
    }
    Ok(if failed == 0 { 0 } else { 1 })
}

pub fn cmd_oracle(which: Oracle, out: &mut dyn Write) -> Result<u8> {
    match which {
        Oracle::Ou { beta, eta } => {
            let ou = ou_stationary(beta, eta)?;
            let s = ou.sigma;
            writeln!(
                out,
                "sigma=[[{:?},{:?}],[{:?},{:?}]] alpha={:?}",
                s[0][0], s[0][1], s[1][0], s[1][1], ou.alpha
            )
            .map_err(stdout_err)?;
        }
        Oracle::Tv {
            mu1,
            mu2,
            distance,
            sigma,
        } => {
            let tv = match (mu1, mu2, distance) {
                (Some(a), Some(b), None) => gaussian_tv_isotropic(&a, &b, sigma)?,
                (None, None, Some(d)) => {
                    if sigma.is_nan() || sigma <= 0.0 || d.is_nan() || d < 0.0 {
                        return Err(CliError::config("tv needs sigma > 0 and distance >= 0"));
                    }
                    tv_from_distance(d, sigma)
                }
                _ => {
                    return Err(CliError::config(
                        "tv needs either --mu1 and --mu2, or --distance",
                    ))
                }
            };
            writeln!(out, "tv={tv:?}").map_err(stdout_err)?;
        }
    }
    Ok(0)
}
