//! `trp` — twisted rapid passage sweeps, scans, and gate analysis from JSON
//! run configurations.
//!
//! Exit codes: 0 on success, 2 for configuration errors, 3 for numerical
//! failures.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::Context;

#[derive(Debug)]
pub enum AppError {
    Config(String),
    Numeric(String),
    Io(String),
}

impl AppError {
    fn message(&self) -> &str {
        match self {
            AppError::Config(m) | AppError::Numeric(m) | AppError::Io(m) => m,
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            AppError::Config(_) | AppError::Io(_) => 2,
            AppError::Numeric(_) => 3,
        }
    }
}

impl From<trp::ProfileError> for AppError {
    fn from(err: trp::ProfileError) -> Self {
        AppError::Config(err.to_string())
    }
}

impl From<trp::DynamicsError> for AppError {
    fn from(err: trp::DynamicsError) -> Self {
        match err {
            trp::DynamicsError::StepUnderflow { .. } => AppError::Numeric(err.to_string()),
            other => AppError::Config(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "trp",
    about = "Twisted rapid passage: sweep simulation, resonance tables, parameter scans, NOT/CNOT gate analysis",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for result files.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Worker threads for parameter scans (defaults to all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Dotted-path config override, e.g. --set profile.eta=1.6e-3. May be
    /// repeated; overrides apply after the file is read.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Print resonance times and the twist regime of a profile.
    Resonances(CommonArgs),
    /// Integrate one sweep; write trajectory.csv and summary.json.
    Simulate(CommonArgs),
    /// Scan final probability over a twist-strength range; write sweep.csv.
    Sweep(CommonArgs),
    /// Simulate the two-qubit TRP CNOT; write gate.json and a fidelity summary.
    Cnot(CommonArgs),
    /// Translate between theoretical and experimental parameterizations.
    Translate(CommonArgs),
}

type CommandFn = fn(&Context) -> Result<(), AppError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, run): (&CommonArgs, CommandFn) = match &cli.command {
        Command::Resonances(a) => (a, commands::cmd_resonances),
        Command::Simulate(a) => (a, commands::cmd_simulate),
        Command::Sweep(a) => (a, commands::cmd_sweep),
        Command::Cnot(a) => (a, commands::cmd_cnot),
        Command::Translate(a) => (a, commands::cmd_translate),
    };

    let result = config::load_config(&args.config, &args.set).and_then(|config| {
        let ctx = Context { config, out_dir: args.out.clone(), workers: args.workers };
        run(&ctx)
    });

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.exit_code())
        }
    }
}
