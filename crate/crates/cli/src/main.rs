//! Scenario-driven frontend for donor-acceptor transfer dynamics.
//!
//! Verbs: evolve (time series), sweep (efficiency landscape), resonances
//! (complex resonance table), validate (reference-oracle suite). Exit
//! codes: 0 success, 1 configuration error, 2 numerical failure,
//! 3 validation failure.

mod config;
mod report;
mod run;
mod validate;

use clap::{Args, Parser, Subcommand};
use run::RunError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "datrans", version, about = "Donor-acceptor transfer dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate the initial state over the time grid and write a CSV
    /// series plus a JSON manifest.
    Evolve(CommonArgs),
    /// Sweep one parameter axis and tabulate the transfer efficiencies.
    Sweep(CommonArgs),
    /// Write the complex resonance table for the scenario parameters.
    Resonances(CommonArgs),
    /// Run the reference-oracle validation suite.
    Validate(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Scenario file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker pool width for sweeps; DATRANS_WORKERS overrides the default.
    #[arg(long)]
    workers: Option<usize>,
    /// Seed for randomized validation checks.
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

fn resolve_workers(args: &CommonArgs) -> usize {
    if let Some(w) = args.workers {
        return w.max(1);
    }
    if let Ok(s) = std::env::var("DATRANS_WORKERS") {
        if let Ok(w) = s.parse::<usize>() {
            return w.max(1);
        }
    }
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let args = match &cli.command {
        Command::Evolve(a) | Command::Sweep(a) | Command::Resonances(a) | Command::Validate(a) => a,
    };

    let scenario = match config::load_scenario(&args.config) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(1);
        }
    };
    if let Err(e) = std::fs::create_dir_all(&args.out) {
        eprintln!("cannot create output directory {}: {e}", args.out.display());
        return ExitCode::from(2);
    }
    if let Some(w) = scenario.params.regime_warning() {
        eprintln!("warning: {w}");
    }

    let outcome = match &cli.command {
        Command::Evolve(_) => run::run_evolve(&scenario, &args.out).map(|_| true),
        Command::Sweep(_) => {
            run::run_sweep(&scenario, &args.out, resolve_workers(args)).map(|_| true)
        }
        Command::Resonances(_) => run::run_resonances(&scenario, &args.out).map(|_| true),
        Command::Validate(_) => validate::run_validate(&scenario, &args.out, args.seed),
    };

    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("validation failed; see validation.json");
            ExitCode::from(3)
        }
        Err(RunError::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(2)
        }
        Err(RunError::Io(msg)) => {
            eprintln!("i/o failure: {msg}");
            ExitCode::from(2)
        }
    }
}
