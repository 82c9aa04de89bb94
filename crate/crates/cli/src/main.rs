mod args;
mod commands;
mod manifest;
mod output;

use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use serde_json::Value;

use args::{Cli, Command};
use manifest::{now_ms, Params, RunManifest};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(pcsemi_core::Error),
    Io(String),
}

impl CliError {
    pub fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }
}

impl From<pcsemi_core::Error> for CliError {
    fn from(err: pcsemi_core::Error) -> Self {
        CliError::Core(err)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Io(msg) => f.write_str(msg),
            CliError::Core(err) => write!(f, "{err}"),
        }
    }
}

/// What a command produced: the digest of its primary output and any
/// violated inequalities.
pub struct Outcome {
    pub digest: String,
    pub violations: Vec<String>,
}

fn to_value<T: serde::Serialize>(v: &Option<T>) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn positional(command: &Command) -> Option<(&'static str, Value)> {
    match command {
        Command::Recover { instance, .. } => Some(("instance", to_value(instance))),
        Command::Verify { suite, .. } => Some(("suite", to_value(suite))),
        Command::Experiment { tag, .. } => Some(("tag", to_value(tag))),
        Command::Gen(_) | Command::Bounds(_) => None,
    }
}

fn run(command: &Command) -> Result<Outcome, CliError> {
    let started_at_ms = now_ms();
    let common = command.common();
    let mut params = Params::new(command.name(), common, positional(command))?;
    if let Some(threads) = params.get::<usize>("threads")? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot configure {threads} threads: {e}")))?;
    }
    let seed = params.seed()?;
    let outcome = match command {
        Command::Gen(_) => commands::gen(&mut params, seed)?,
        Command::Recover { .. } => commands::recover(&mut params)?,
        Command::Verify { .. } => commands::verify(&mut params, seed)?,
        Command::Bounds(_) => commands::bounds(&mut params, seed)?,
        Command::Experiment { .. } => commands::experiment(&mut params, seed)?,
    };
    if let Some(path) = &common.manifest {
        RunManifest {
            subcommand: command.name().into(),
            params: params.used,
            seed,
            version: env!("CARGO_PKG_VERSION").into(),
            started_at_ms,
            finished_at_ms: now_ms(),
            output_digest: outcome.digest.clone(),
        }
        .write(path)?;
    }
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return ExitCode::from(err.exit_code().clamp(0, 255) as u8);
        }
    };
    match run(&cli.command) {
        Ok(outcome) if outcome.violations.is_empty() => ExitCode::SUCCESS,
        Ok(outcome) => {
            for v in &outcome.violations {
                eprintln!("violation: {v}");
            }
            eprintln!("{} violation(s)", outcome.violations.len());
            ExitCode::from(1)
        }
        Err(err) => {
            eprintln!("error: {}", err.to_string().replace('\n', " "));
            ExitCode::from(2)
        }
    }
}
