//! Benchmark CLI for the inertial forward–backward solver library.
//!
//! Subcommands:
//!
//! - `solve`: build (or load) an instance, run one or more solver variants,
//!   write a trace CSV and a summary JSON per run;
//! - `spectral`: envelope/crossover analysis of a quadratic model, CSV plus
//!   scalar summary;
//! - `reference`: compute a high-accuracy solution with the greedy scheme
//!   and serialize it for later `--reference` runs;
//! - `instance`: serialize a generated instance to a container file.
//!
//! Exit codes: 0 success, 1 usage error, 2 numerical fault.

use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod formats;
mod instances;
mod presets;

#[derive(Debug)]
pub struct CliError {
    message: String,
    numerical: bool,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            numerical: false,
        }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            numerical: true,
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "fista",
    about = "Inertial forward-backward solvers: benchmark runs, spectral analysis, reference solutions",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run solver variants on an instance and emit trace CSV + summary JSON
    Solve(commands::SolveOpts),
    /// Envelope and crossover analysis for a quadratic spectrum
    Spectral(commands::SpectralOpts),
    /// Compute a high-accuracy reference solution (greedy scheme, tight tol)
    Reference(commands::ReferenceOpts),
    /// Serialize a generated instance to a container file
    Instance(commands::InstanceCmdOpts),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints help/version through the error path with status 0.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Solve(opts) => commands::cmd_solve(opts),
        Command::Spectral(opts) => commands::cmd_spectral(opts),
        Command::Reference(opts) => commands::cmd_reference(opts),
        Command::Instance(opts) => commands::cmd_instance(opts),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(if e.numerical { 2 } else { 1 })
        }
    }
}
