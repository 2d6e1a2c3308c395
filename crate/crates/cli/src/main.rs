mod commands;
mod example;
mod parse;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] canogrowth::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if !e.is_input_error() => 3,
            _ => 2,
        }
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io { context: context.into(), source }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "canogrowth", version, about = "Growth of monodromy matrices of 2x2 canonical systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[arg(long)]
    pub rmin: Option<f64>,
    #[arg(long)]
    pub rmax: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Monodromy matrix at one point.
    Monodromy {
        #[arg(long)]
        system: PathBuf,
        /// Complex literal `a+bi`.
        #[arg(long)]
        z: String,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Growth curves as CSV.
    Curves {
        #[arg(long)]
        system: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        /// Comma-separated subset of lower, maxmod, upper:opt, upper:recipe.
        #[arg(long, default_value = "maxmod")]
        which: String,
        #[arg(long)]
        tol: Option<f64>,
        /// Angle samples for maxmod.
        #[arg(long, default_value_t = canogrowth::curves::DEFAULT_SAMPLES)]
        samples: usize,
        /// recipe, cd or dyadic.
        #[arg(long, default_value = "cd")]
        strategy: String,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate an example family and optionally its curves and report.
    Example(example::ExampleArgs),
    /// Check the four Romanov conditions for a bound-data family.
    BoundCheck {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        d: f64,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[command(flatten)]
        grid: GridArgs,
        /// recipe, or romanov with --alpha.
        #[arg(long, default_value = "recipe")]
        family: String,
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Zero-count inequality between a Hamburger spec and a cut of it.
    CutCheck {
        #[arg(long)]
        system: PathBuf,
        /// Comma-separated 0-based segment indices to keep.
        #[arg(long, conflicts_with = "seed")]
        keep: Option<String>,
        /// Keep a random half of the segments.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1000.0)]
        rmax: f64,
        #[arg(long, default_value_t = 200)]
        points: usize,
    },
    /// Zero count and density of `w22` on `[-R, R]`.
    Kdb {
        #[arg(long)]
        system: PathBuf,
        #[arg(long, default_value_t = 100.0)]
        rmax: f64,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Monodromy { system, z, tol } => commands::monodromy(&system, &z, tol),
        Command::Curves { system, grid, which, tol, samples, strategy, out } => {
            commands::curves(&system, &grid, &which, tol, samples, &strategy, out.as_deref())
        }
        Command::Example(args) => example::run(&args),
        Command::BoundCheck { system, d, c, grid, family, alpha } => {
            commands::bound_check(&system, d, c, &grid, &family, alpha)
        }
        Command::CutCheck { system, keep, seed, rmax, points } => {
            commands::cut_check(&system, keep.as_deref(), seed, rmax, points)
        }
        Command::Kdb { system, rmax } => commands::kdb(&system, rmax),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
