//! `quoin` — seeded, reproducible driver for the Bernoulli-factory
//! simulator: bias sweeps, single-protocol coin runs, figure-data
//! generation, and readout-noise ceiling reports.

mod commands;
mod manifest;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{coin, noise_ceiling, reproduce, sweep};
use output::OutputFormat;

#[derive(Debug, Parser)]
#[command(name = "quoin", version, about = "Bernoulli-factory simulator driven by Bell measurements of quoin pairs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sweep the quoin bias and record Bell-outcome counts per grid point.
    Sweep(sweep::SweepArgs),
    /// Run one coin protocol and emit its bits and cost ledger.
    Coin(coin::CoinArgs),
    /// Generate the data series behind the reference figures.
    Reproduce(reproduce::ReproduceArgs),
    /// Print the confusion matrix and the doubling ceiling it implies.
    NoiseCeiling(noise_ceiling::NoiseCeilingArgs),
}

/// Failures mapped onto the documented exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Malformed arguments (exit 2, matching clap's own usage errors).
    Usage(String),
    /// Filesystem failures (exit 3).
    Io { path: PathBuf, source: std::io::Error },
    /// A protocol hit its termination cap; partial output was written
    /// (exit 4).
    Truncated(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(message) => write!(f, "{message}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Truncated(message) => write!(f, "{message}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Truncated(_) => 4,
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

fn main() -> ExitCode {
    // The raw argv (minus the binary name) goes into the manifest verbatim
    // so a run can be replayed from it.
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sweep(args) => sweep::run(args, &argv),
        Command::Coin(args) => coin::run(args, &argv),
        Command::Reproduce(args) => reproduce::run(args, &argv),
        Command::NoiseCeiling(args) => noise_ceiling::run(args, &argv),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(error.exit_code())
        }
    }
}

/// Parse `a0,a1,b0,b1` into a confusion-parameter set.
pub fn parse_noise(spec: &str) -> Result<quoin_core::ReadoutConfusion, CliError> {
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() != 4 {
        return Err(CliError::Usage(format!(
            "--noise expects four comma-separated values a0,a1,b0,b1, got `{spec}`"
        )));
    }
    let mut values = [0.0f64; 4];
    for (slot, part) in values.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("invalid noise parameter `{part}`")))?;
    }
    quoin_core::ReadoutConfusion::new(values[0], values[1], values[2], values[3])
        .map_err(|e| CliError::Usage(e.to_string()))
}

/// Parse `start:end:steps` into a bias grid.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::Usage(format!(
            "--p-grid expects start:end:steps, got `{spec}`"
        )));
    }
    let start: f64 = parts[0]
        .parse()
        .map_err(|_| CliError::Usage(format!("invalid grid start `{}`", parts[0])))?;
    let end: f64 = parts[1]
        .parse()
        .map_err(|_| CliError::Usage(format!("invalid grid end `{}`", parts[1])))?;
    let steps: u32 = parts[2]
        .parse()
        .map_err(|_| CliError::Usage(format!("invalid grid steps `{}`", parts[2])))?;
    quoin_core::analysis::sweep::even_grid(start, end, steps)
        .map_err(|e| CliError::Usage(e.to_string()))
}

/// Shared output options.
#[derive(Debug, Clone, clap::Args)]
pub struct OutputArgs {
    /// Output format for data files.
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
}
