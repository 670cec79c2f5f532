//! `compcap`: capacity tables, spectra, layered rate profiles, random-code
//! simulations and index-set demos for composite channels.

mod commands;
mod run_config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use run_config::{Command, Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "compcap", version, about = "Capacity of composite channels with receiver side information")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// q, C_q, C^o_q, C^e and the upper bound over an outage grid
    Capacity(Flags),
    /// Empirical cdf of the normalized information density
    Spectrum(Flags),
    /// Layered rate profile, or expected rates of parametric layerings
    Broadcast(Flags),
    /// Random-code outage and error rates per blocklength
    Simulate(Flags),
    /// Index sets of a broadcast code mapped to an expected-rate code
    Mapdemo(Flags),
}

#[derive(clap::Args)]
struct Flags {
    /// key = value config file
    config: PathBuf,
    /// Grid size (outage levels, cdf points, or profile nodes)
    #[arg(long)]
    grid: Option<usize>,
    /// Monte Carlo trials
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Threshold back-off for `simulate`
    #[arg(long)]
    tol: Option<f64>,
    /// Output file; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a gnuplot script for the output (needs --out)
    #[arg(long)]
    plot: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, flags) = match cli.command {
        Sub::Capacity(f) => (Command::Capacity, f),
        Sub::Spectrum(f) => (Command::Spectrum, f),
        Sub::Broadcast(f) => (Command::Broadcast, f),
        Sub::Simulate(f) => (Command::Simulate, f),
        Sub::Mapdemo(f) => (Command::Mapdemo, f),
    };
    let overrides = Overrides {
        grid: flags.grid,
        trials: flags.trials,
        seed: flags.seed,
        tol: flags.tol,
        out: flags.out,
        plot: flags.plot,
    };
    let config = match RunConfig::load(command, &flags.config, overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("compcap: {e}");
            return ExitCode::from(2);
        }
    };
    match commands::run(&config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("compcap: {e}");
            ExitCode::FAILURE
        }
    }
}
