//! `eet`: command-line front end for scenario simulation, rate tables, bath spectra and
//! Hamiltonian scale scans.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use eet_core::{Method, ScanMode, ScenarioError};

use commands::{ScanArgs, SimulateArgs, SpectrumArgs};

#[derive(Parser)]
#[command(name = "eet", version, about = "Exciton energy transfer in phonon-coupled site networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate the density matrix and write site populations and exciton coherences.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        /// Output file; stdout when omitted. A `.thermal.json` sidecar is written next to it.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
        /// Keep only resonant tensor elements.
        #[arg(long)]
        secular: bool,
        /// Drop the principal-value (Lamb shift) contribution.
        #[arg(long)]
        no_lamb_shift: bool,
        #[arg(long)]
        method: Option<Method>,
    },
    /// Tabulate log10 ζ, log10 C and log10 k for every ordered pair of exciton states.
    Rates {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Sample J(ω) and C(ω) on a frequency grid.
    Spectrum {
        /// Take the bath from this scenario and mark its transition frequencies.
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Bath preset used when no scenario is given.
        #[arg(long, default_value = "GaAs-10K")]
        bath: String,
        /// Override the bath temperature, K.
        #[arg(long)]
        temperature: Option<f64>,
        /// min:max:step in rad/ps.
        #[arg(long, default_value = "-5:5:0.01", allow_hyphen_values = true)]
        grid: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Dominant transfer target as the Hamiltonian is rescaled.
    Scan {
        #[arg(long)]
        scenario: PathBuf,
        /// Comma-separated scale factors.
        #[arg(long)]
        factors: Option<String>,
        /// Factor range min:max:step, instead of --factors.
        #[arg(long)]
        grid: Option<String>,
        /// `energy` scales eigenenergies only; `geometry` also moves the sites.
        #[arg(long, default_value = "energy")]
        mode: ScanMode,
        /// Source exciton state (1-based); defaults to the one the scenario starts in.
        #[arg(long)]
        from: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Simulate { scenario, out, json, secular, no_lamb_shift, method } => {
            commands::simulate_cmd(&SimulateArgs { scenario, out, json, secular, no_lamb_shift, method })
        }
        Command::Rates { scenario, out, json } => commands::rates_cmd(&scenario, out.as_deref(), json),
        Command::Spectrum { scenario, bath, temperature, grid, out, json } => {
            commands::spectrum_cmd(&SpectrumArgs { scenario, bath, temperature, grid, out, json })
        }
        Command::Scan { scenario, factors, grid, mode, from, out, json } => {
            commands::scan_cmd(&ScanArgs { scenario, factors, grid, mode, from, out, json })
        }
    }
}

/// Exit status: 1 runtime failure, 2 usage, 3 scenario syntax, 4 schema, 5 physics.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<ScenarioError>() {
        Some(ScenarioError::Syntax { .. }) => 3,
        Some(ScenarioError::Schema { .. }) => 4,
        Some(ScenarioError::Physics { .. }) => 5,
        None => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("EET_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let kind = err.downcast_ref::<ScenarioError>().map(|e| e.kind()).unwrap_or("runtime");
            eprintln!("error[{kind}]: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
