//! `pulsedose`: command-line studies of pulse-modulated dosing controllers.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numerical failure.

mod args;
mod commands;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, FileConfig, Format};
use commands::{Context, EvaluateArgs};
use output::{display_path, OutDir};

/// Failure of a command, classified for the exit code.
#[derive(Debug)]
pub enum CliError {
    Core(pulsedose_core::Error),
    /// A core failure while handling a named file.
    AtPath(PathBuf, pulsedose_core::Error),
    Io(PathBuf, std::io::Error),
    Usage(String),
    /// Serialising an output document failed.
    Json(serde_json::Error),
}

impl CliError {
    fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io(path.to_path_buf(), e)
    }

    fn at(path: &Path, e: pulsedose_core::Error) -> Self {
        CliError::AtPath(path.to_path_buf(), e)
    }

    fn json(e: serde_json::Error) -> Self {
        CliError::Json(e)
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) | CliError::AtPath(_, e) if !e.is_validation() => 3,
            CliError::Json(_) => 3,
            _ => 2,
        }
    }
}

impl From<pulsedose_core::Error> for CliError {
    fn from(e: pulsedose_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::AtPath(p, e) => write!(f, "{}: {e}", display_path(p)),
            CliError::Io(p, e) => write!(f, "{}: {e}", display_path(p)),
            CliError::Usage(m) => f.write_str(m),
            CliError::Json(e) => write!(f, "could not serialise output: {e}"),
        }
    }
}

fn read_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", display_path(path))))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(p) => read_config(p)?,
        None => FileConfig::default(),
    };
    let ctx = Context {
        command: cli.command.name(),
        out: OutDir::new(cli.out.clone().or_else(|| file.out.clone()))?,
        format: cli.format.or(file.format).unwrap_or(Format::Human),
        file,
    };
    match &cli.command {
        Command::FixedPoint { plant, target } => commands::fixed_point_cmd(&ctx, plant, target),
        Command::Stability {
            plant,
            target,
            slopes,
            hopf,
        } => commands::stability_cmd(&ctx, plant, target, slopes, *hopf),
        Command::Design {
            plant,
            target,
            slopes,
            bounds,
        } => commands::design_cmd(&ctx, plant, target, slopes, bounds),
        Command::Simulate { plant, policy, run } => commands::simulate_cmd(&ctx, plant, policy, run),
        Command::Sweep { plant, target, sweep } => commands::sweep_cmd(&ctx, plant, target, sweep),
        Command::Evaluate {
            cohort,
            policy,
            run,
            y_min,
            y_max,
            label,
        } => commands::evaluate_cmd(
            &ctx,
            EvaluateArgs {
                cohort,
                policy,
                run,
                y_min: *y_min,
                y_max: *y_max,
                label: label.clone(),
            },
        ),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
