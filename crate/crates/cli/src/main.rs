//! `fisher-stab`: spectra, gains, simulations, sweeps and checks for boundary
//! feedback stabilization of Fisher's equation.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{CliError, LoopMode, SweepArgs};
use config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "fisher-stab", version, about = "Boundary feedback stabilization of Fisher's equation")]
struct Cli {
    /// Flat `key = value` configuration file; defaults are used when omitted.
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Eigenvalues, boundary derivatives and the unstable-mode count.
    Spectrum,
    /// Gain matrices, gain vector and their certificates.
    Gains,
    /// Run one simulation and write trace.csv (and snapshots.csv).
    Simulate {
        #[arg(long, conflicts_with = "closed_loop")]
        open_loop: bool,
        /// The default.
        #[arg(long)]
        closed_loop: bool,
        /// Drop the quadratic term.
        #[arg(long)]
        linearized: bool,
    },
    /// Classify closed-loop runs over observation windows [a, b].
    Sweep {
        #[arg(long)]
        b: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        a_min: f64,
        #[arg(long, default_value_t = 0.35)]
        a_max: f64,
        #[arg(long, default_value_t = 0.01)]
        resolution: f64,
    },
    /// Run the invariant suite; exits 5 if any check fails.
    Verify {
        #[arg(long, hide = true)]
        inject_identity_b: bool,
    },
    /// Write plot-ready CSV bundles fig1, fig2, fig3a, fig3b and fig4.
    Figures,
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path).map_err(CliError::config)?,
        None => RunConfig::default(),
    };
    match cli.command {
        Command::Spectrum => commands::cmd_spectrum(&cfg),
        Command::Gains => commands::cmd_gains(&cfg),
        Command::Simulate { open_loop, linearized, .. } => {
            let mode = if open_loop { LoopMode::Open } else { LoopMode::Closed };
            commands::cmd_simulate(&cfg, mode, linearized)
        }
        Command::Sweep { b, a_min, a_max, resolution } => {
            commands::cmd_sweep(&cfg, &SweepArgs { b, a_min, a_max, resolution })
        }
        Command::Verify { inject_identity_b } => commands::cmd_verify(&cfg, inject_identity_b),
        Command::Figures => commands::cmd_figures(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code as u8)
        }
    }
}
