//! Command-line front end shared by the `treegp` binary.

pub mod args;
pub mod commands;
pub mod dataset;
pub mod report;

use std::process::ExitCode;

use clap::Parser;
use thiserror::Error;

use crate::gp::GpError;
use crate::kernels::KernelError;
use crate::opt::OptError;
use crate::synth::SynthError;
use crate::trees::TreeError;
use args::{Cli, Command};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Gp(#[from] GpError),
    #[error(transparent)]
    Opt(#[from] OptError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}:{line}: {message}")]
    Format { path: String, line: usize, message: String },
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Shape(String),
    #[error("predict needs --model <model.json> written by train")]
    MissingModel,
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Tree(e) => e.code(),
            CliError::Kernel(e) => e.code(),
            CliError::Gp(e) => e.code(),
            CliError::Opt(e) => e.code(),
            CliError::Synth(e) => e.code(),
            CliError::Io { .. } => "io",
            CliError::Format { .. } => "format",
            CliError::Usage(_) => "usage",
            CliError::Shape(_) => "shape-mismatch",
            CliError::MissingModel => "missing-model",
        }
    }
}

/// Runs one parsed command line.
pub fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Kernel(c) => commands::cmd_kernel(c),
        Command::Train(c) => commands::cmd_train(c),
        Command::Predict(c) => commands::cmd_predict(c),
        Command::Crossval(c) => commands::cmd_crossval(c),
        Command::Synth(c) => commands::cmd_synth(c),
        Command::Recover(c) => commands::cmd_recover(c),
        Command::Compare(c) => commands::cmd_compare(c),
        Command::Benchmark(c) => commands::cmd_benchmark(c),
    }
}

/// Parses `args` (including the program name) and runs the command,
/// printing `ERROR <code>: <message>` on failure.
pub fn main_from_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("ERROR usage: {first}");
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ERROR {}: {e}", e.code());
            ExitCode::FAILURE
        }
    }
}
