//! `qmeas`: sweeps, bound checks, experiment simulation and waveplate
//! compilation from the command line.

mod commands;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "qmeas", version, about = "Information gain, disturbance and reversibility of quantum measurements")]
pub struct Cli {
    /// Output format; verify defaults to json, every other command to csv.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Write output to this file instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// Master seed for every stochastic step.
    #[arg(long, global = true, env = "QMEAS_SEED", default_value_t = 0)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate G, F, R and all bound gaps along a measurement family.
    Sweep(SweepArgs),
    /// Evaluate the bounds for a measurement given as JSON.
    Verify(VerifyArgs),
    /// Simulate the photon-counting experiment with Monte-Carlo error bars.
    Simulate(SimulateArgs),
    /// Compile a diagonal measurement into half-wave-plate angles.
    Compile(CompileArgs),
}

#[derive(Debug, Args)]
pub struct FamilyArgs {
    /// Built-in family index 0..=4.
    #[arg(long, conflicts_with = "family_file")]
    pub family: Option<u8>,

    /// Family description in JSON, replacing a built-in one.
    #[arg(long, value_name = "PATH")]
    pub family_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub family: FamilyArgs,

    /// Strength grid `start:end:count`, both ends included; defaults to 101
    /// points over the family domain.
    #[arg(long)]
    pub grid: Option<String>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Measurement JSON `{ "dim": d, "kraus": [...] }`.
    pub measurement: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub family: FamilyArgs,

    /// Single measurement strength.
    #[arg(long, conflicts_with = "grid")]
    pub p: Option<f64>,

    /// Strength grid `start:end:count`.
    #[arg(long)]
    pub grid: Option<String>,

    /// Input purity in `ρ(e) = e|ψ⟩⟨ψ| + (1 − e)I/3`.
    #[arg(long, default_value_t = 1.0)]
    pub e: f64,

    /// Expected photon counts per setting.
    #[arg(long, default_value_t = 10_000)]
    pub shots: u64,

    /// Monte-Carlo runs per point.
    #[arg(long, default_value_t = 100)]
    pub runs: usize,

    /// Infinite statistics instead of sampled counts.
    #[arg(long)]
    pub exact: bool,

    /// Fit the noise parameter to the simulated data.
    #[arg(long)]
    pub fit_e: bool,
}

#[derive(Debug, Args)]
pub struct CompileArgs {
    /// Measurement JSON; alternatively use --family with --p.
    #[arg(conflicts_with_all = ["family", "family_file"])]
    pub measurement: Option<PathBuf>,

    #[command(flatten)]
    pub family: FamilyArgs,

    #[arg(long)]
    pub p: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qmeas: {e}");
            ExitCode::from(e.code() as u8)
        }
    }
}
