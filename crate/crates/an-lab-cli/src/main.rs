//! `an-lab`: experiment driver for artificial-noise design against an
//! untrusted amplify-and-forward relay. Subcommands sweep phase thresholds,
//! SER curves, optimal power laws, and Rayleigh-averaged designs, writing
//! CSV to stdout or to `--out` with a `.meta` run manifest alongside.
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration or usage
//! error, 3 partial runtime failure (rows marked `failed`).

mod commands;
mod config;
mod output;
mod verify;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::commands::{cmd_aser, cmd_power_opt, cmd_ser_curve, cmd_ser_vs_ez, cmd_threshold};
use crate::commands::{require_config, CommandOutput};
use crate::config::Experiment;
use crate::output::{deliver, RunMeta};
use crate::verify::cmd_verify;

/// Errors surfaced to the user; the variant picks the exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad config file, bad flags, or a command/config mismatch (exit 2).
    #[error("{0}")]
    Config(String),
    /// Output could not be written (exit 2).
    #[error("{0}")]
    Io(String),
    /// A computation failed outright (exit 3).
    #[error("{0}")]
    Runtime(String),
}

#[derive(Parser)]
#[command(
    name = "an-lab",
    version,
    about = "Artificial-noise design and evaluation for square QAM relayed over an untrusted amplify-and-forward node"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration (TOML).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Write CSV here instead of stdout; a run manifest is written next to
    /// it with extension .meta.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Override the RNG seed from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the Monte Carlo trial budget from the config.
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// Worker threads (default: AN_LAB_THREADS, else all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Phase-crossover amplitude per modulation order over an a/sigma grid.
    Threshold,
    /// Fixed-channel SER versus AN amplitude (noise-deviation units).
    SerCurve,
    /// Optimal two-point design parameters over an E_z/N_0 sweep.
    PowerOpt,
    /// Fixed-channel SER versus E_z/N_0 for optimal and reference designs.
    SerVsEz,
    /// Rayleigh-averaged SER versus E_z/N_0 for statistical designs.
    Aser {
        /// Also average the per-realization optimal design over channel
        /// draws (much costlier per point).
        #[arg(long)]
        with_instantaneous_expectation: bool,
    },
    /// Re-derive recorded reference values and check simulation agreement.
    Verify,
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Threshold => "threshold",
        Command::SerCurve => "ser-curve",
        Command::PowerOpt => "power-opt",
        Command::SerVsEz => "ser-vs-ez",
        Command::Aser { .. } => "aser",
        Command::Verify => "verify",
    }
}

fn configure_threads(flag: Option<usize>) {
    let requested = flag.or_else(|| {
        std::env::var("AN_LAB_THREADS")
            .ok()
            .and_then(|s| s.parse::<usize>().ok())
            .filter(|&n| n > 0)
    });
    if let Some(n) = requested {
        // Ignore failure: the pool can only be configured once per process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn run(cli: &Cli) -> Result<i32, CliError> {
    configure_threads(cli.threads);
    let started = Instant::now();

    let mut experiment: Option<Experiment> = match &cli.config {
        Some(path) => Some(Experiment::load(path)?),
        None => None,
    };
    if let Some(exp) = experiment.as_mut() {
        if let Some(seed) = cli.seed {
            exp.seed = seed;
        }
        if let Some(trials) = cli.trials {
            exp.trials = trials;
        }
    }
    let seed = experiment.as_ref().map(|e| e.seed).unwrap_or(0);
    let trials = experiment
        .as_ref()
        .map(|e| e.trials)
        .unwrap_or(1_000_000);
    let seed = cli.seed.unwrap_or(seed);
    let trials = cli.trials.unwrap_or(trials);
    let config_sha256 = experiment
        .as_ref()
        .map(|e| e.config_sha256.clone())
        .unwrap_or_else(|| "none".to_string());
    let experiment_name = experiment
        .as_ref()
        .map(|e| e.name.clone())
        .unwrap_or_else(|| "none".to_string());

    let name = command_name(&cli.command);
    let (content, exit) = match &cli.command {
        Command::Threshold => {
            let out = cmd_threshold(experiment.as_ref())?;
            (out.content, out.exit)
        }
        Command::SerCurve => {
            let CommandOutput { content, exit } =
                cmd_ser_curve(require_config(&experiment, name)?)?;
            (content, exit)
        }
        Command::PowerOpt => {
            let CommandOutput { content, exit } =
                cmd_power_opt(require_config(&experiment, name)?)?;
            (content, exit)
        }
        Command::SerVsEz => {
            let CommandOutput { content, exit } =
                cmd_ser_vs_ez(require_config(&experiment, name)?)?;
            (content, exit)
        }
        Command::Aser {
            with_instantaneous_expectation,
        } => {
            let CommandOutput { content, exit } =
                cmd_aser(require_config(&experiment, name)?, *with_instantaneous_expectation)?;
            (content, exit)
        }
        Command::Verify => {
            let report = cmd_verify(seed, trials)?;
            print!("{}", report.text);
            if cli.out.is_some() {
                let meta = RunMeta {
                    command: name.to_string(),
                    experiment: experiment_name,
                    config_sha256,
                    seed,
                    trials,
                    wall_time_s: started.elapsed().as_secs_f64(),
                };
                deliver(cli.out.as_deref(), &report.csv, &meta)?;
            }
            return Ok(if report.all_passed { 0 } else { 1 });
        }
    };

    let meta = RunMeta {
        command: name.to_string(),
        experiment: experiment_name,
        config_sha256,
        seed,
        trials,
        wall_time_s: started.elapsed().as_secs_f64(),
    };
    deliver(cli.out.as_deref(), &content, &meta)?;
    Ok(exit)
}

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("an-lab: {err}");
            let code = match err {
                CliError::Config(_) | CliError::Io(_) => 2,
                CliError::Runtime(_) => 3,
            };
            std::process::exit(code);
        }
    }
}
