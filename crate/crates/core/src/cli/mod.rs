//! The `contact` command line: scenario files in, CSV and JSON artifacts out.

mod commands;
pub mod config;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub use commands::{CheckKind, Outputs};
pub use config::{Scenario, ScenarioConfig};

use crate::error::Error;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("check failed: {0}")]
    Failed(String),
    #[error("numerical failure: {0}")]
    Numerical(Error),
    #[error("cannot write output {path}: {source}")]
    Output {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_)
            | Error::InvalidChart(_)
            | Error::InvalidIntegrator(_)
            | Error::DimensionMismatch { .. }
            | Error::NonFinitePoint
            | Error::NonAdapted(_)
            | Error::NonAbelian
            | Error::NonzeroMomentum(_)
            | Error::Invalid(_) => CliError::Config(e.to_string()),
            Error::NonInvariant(_) | Error::NotContactomorphism { .. } | Error::StartMismatch(_) => {
                CliError::Failed(e.to_string())
            }
            other => CliError::Numerical(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Output { .. } => EXIT_CONFIG,
            CliError::Failed(_) => EXIT_FAILED,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "contact", version, about = "Contact Hamiltonian dynamics, brackets, lifts and reduction")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Scenario file (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `[output] dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for sample draws; overrides `seed` in the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate X_H from each initial condition.
    Integrate,
    /// Run an identity suite.
    Check {
        #[arg(value_enum)]
        what: CheckKind,
    },
    /// Reduce by the configured action at zero momentum and compare dynamics.
    Reduce,
    /// Test whether the extension of a vector field has Legendrian image.
    LiftCheck,
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(out) => {
            if !cli.quiet {
                println!("{}", out.summary);
            }
            if out.passed {
                EXIT_PASS
            } else {
                EXIT_FAILED
            }
        }
        Err(e) => {
            eprintln!("contact: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<Outputs, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config <path> is required".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let scenario = Scenario::from_str(&text, cli.seed)?;
    let outputs = execute_scenario(&scenario, &cli.command)?;
    let dir = cli
        .out
        .clone()
        .or_else(|| scenario.raw.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    write_outputs(&dir, &outputs)?;
    Ok(outputs)
}

/// Computes all artifacts of a command without touching the filesystem.
pub fn execute_scenario(scenario: &Scenario, command: &Command) -> Result<Outputs, CliError> {
    match command {
        Command::Integrate => commands::integrate(scenario),
        Command::Check { what } => commands::check(scenario, *what),
        Command::Reduce => commands::reduce_cmd(scenario),
        Command::LiftCheck => commands::lift_check(scenario),
    }
}

fn write_outputs(dir: &Path, outputs: &Outputs) -> Result<(), CliError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CliError::Output { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    for (name, bytes) in &outputs.files {
        let path = dir.join(name);
        std::fs::write(&path, bytes).map_err(io(&path))?;
    }
    Ok(())
}
