//! `mg-cavity`: simulations, cavity solutions and their reconciliation.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Mode;
use error::CliError;
use output::{Provenance, Sink};

#[derive(Parser)]
#[command(name = "mg-cavity", version, about = "Minority game simulations and cavity-method theory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Worker threads for independent runs.
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory (overrides `output.dir`, default `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed (overrides `ensemble.seed`).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Ensemble of games: observables, histograms, aggregates.
    Simulate(Common),
    /// Cavity solution at one alpha.
    Solve(Common),
    /// Cavity solutions along a grid.
    Sweep(Common),
    /// Score trajectories and timescale statistics.
    Dynamics(Common),
    /// Theory against simulation, with pass/fail per observable.
    Compare(Common),
    /// Critical alpha of the replica-symmetric phase.
    AlphaC(Common),
}

fn execute(mode: Mode, args: &Common) -> Result<Vec<PathBuf>, CliError> {
    let mut cfg = config::load(&args.config)?;
    if let Some(s) = args.seed {
        cfg.ensemble.seed = s;
    }
    cfg.validate(mode)?;
    let workers = args.workers.or(cfg.output.workers).unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if workers < 1 {
        return Err(CliError::validation("--workers", "must be >= 1"));
    }
    let dir = args.out.clone().or(cfg.output.dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let prov = Provenance::new(mode.name(), &cfg, commands::seeds_for(mode, &cfg));
    let mut sink = Sink::new(&dir, prov);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().map_err(|e| CliError::Run(e.to_string()))?;
    pool.install(|| match mode {
        Mode::Simulate => commands::simulate(&cfg, &mut sink),
        Mode::Solve => commands::solve(&cfg, &mut sink),
        Mode::Sweep => commands::sweep(&cfg, &mut sink),
        Mode::Dynamics => commands::dynamics(&cfg, &mut sink),
        Mode::Compare => commands::compare(&cfg, &mut sink),
        Mode::AlphaC => commands::alpha_c(&cfg, &mut sink),
    })?;
    Ok(sink.written)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mode, args) = match &cli.command {
        Command::Simulate(a) => (Mode::Simulate, a),
        Command::Solve(a) => (Mode::Solve, a),
        Command::Sweep(a) => (Mode::Sweep, a),
        Command::Dynamics(a) => (Mode::Dynamics, a),
        Command::Compare(a) => (Mode::Compare, a),
        Command::AlphaC(a) => (Mode::AlphaC, a),
    };
    match execute(mode, args) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("mg-cavity {}: {e}", mode.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
