use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "pcsemi",
    version,
    about = "Semi-random planted clique experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate an instance file.
    Gen(Common),
    /// Run the unique-good-clique rule on an instance file.
    Recover {
        /// Instance file written by `gen`.
        instance: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Run a property sweep: pb-bound, column-laws, local-bounds, chain, hg, union-bound.
    Verify {
        suite: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Chained KL bounds for a design and clique size.
    Bounds(Common),
    /// Seeded Jaccard experiment: recovery-upper, coupled-lower, oracle-line.
    Experiment {
        tag: Option<String>,
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Gen(_) => "gen",
            Command::Recover { .. } => "recover",
            Command::Verify { .. } => "verify",
            Command::Bounds(_) => "bounds",
            Command::Experiment { .. } => "experiment",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Command::Gen(c) | Command::Bounds(c) => c,
            Command::Recover { common, .. }
            | Command::Verify { common, .. }
            | Command::Experiment { common, .. } => common,
        }
    }
}

/// Flags shared by every subcommand. Unset flags fall back to the `--config`
/// manifest, then to per-command defaults.
#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct Common {
    /// Generator or design tag.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    /// Revealed vertex for `recover`; defaults to the file's.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v: Option<usize>,
    /// empty, random[:p], extra_cliques:t
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adversary: Option<String>,
    /// Master seed; falls back to PCSEMI_SEED.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    /// Primary output file.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// CSV output file; stdout when absent.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    /// Run manifest to take parameters from.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Where to write this run's manifest.
    #[arg(long)]
    #[serde(skip)]
    pub manifest: Option<PathBuf>,
}
