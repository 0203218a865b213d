//! Experiment orchestration behind the `crossdiff` binary: config parsing,
//! subcommand dispatch and report files. Each run writes into its own output
//! directory, echoes the resolved config there and stamps every file with
//! the config hash.

mod commands;
pub mod config;
pub mod corpus;

pub use commands::read_index;
pub use config::{parse_config, parse_config_str, ExperimentConfig};

use crate::error::{Error, Result};
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Simulate,
    VerifyGnbmo,
    Bmo,
    Diagnose,
    Uniqueness,
    Diagonalize,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::VerifyGnbmo => "verify-gnbmo",
            Command::Bmo => "bmo",
            Command::Diagnose => "diagnose",
            Command::Uniqueness => "uniqueness",
            Command::Diagonalize => "diagonalize",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    /// 0 success, 2 numerical failure (artifacts up to the failure are kept).
    pub exit_code: i32,
    pub files: Vec<PathBuf>,
    pub message: String,
}

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

/// Exit code for an error that aborted a run.
pub fn exit_code_for(err: &Error) -> i32 {
    if err.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_USAGE
    }
}

/// Runs `command`, writing into `out` (created if missing). Relative input
/// paths in the config resolve against `base`.
pub fn run(command: Command, cfg: &ExperimentConfig, out: &Path, base: &Path) -> Result<Outcome> {
    fs::create_dir_all(out)?;
    let hash = cfg.hash()?;
    let resolved = out.join("config.resolved.toml");
    fs::write(&resolved, format!("# config_hash={hash}\n{}", cfg.to_toml()?))?;
    let ctx = commands::Ctx { cfg, hash, out, base, files: vec![resolved] };
    match command {
        Command::Simulate => commands::simulate(ctx),
        Command::VerifyGnbmo => commands::verify_gnbmo(ctx),
        Command::Bmo => commands::bmo(ctx),
        Command::Diagnose => commands::diagnose(ctx),
        Command::Uniqueness => commands::uniqueness(ctx),
        Command::Diagonalize => commands::diagonalize(ctx),
    }
}
