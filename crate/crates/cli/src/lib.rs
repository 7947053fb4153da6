//! Command layer for the `dicke` binary: configuration loading, the four
//! subcommands and their file outputs.

pub mod commands;
pub mod config;
pub mod selftest;

use std::fs;
use std::path::{Path, PathBuf};

use dicke_core::DickeError;
use serde::Serialize;
use thiserror::Error;

pub use commands::{boundary, evolve, sweep, BoundaryOutput, EvolveSummary, SweepOutput, SweepSummary};
pub use config::{ResolvedConfig, RunConfig};
pub use selftest::{selftest, Check, SelftestReport};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("selftest failed: {0}")]
    Selftest(String),
    #[error("output error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Selftest(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl From<DickeError> for CliError {
    fn from(e: DickeError) -> Self {
        match e {
            DickeError::InvalidParams(_) | DickeError::Config(_) => CliError::Config(e.to_string()),
            DickeError::Io(_) | DickeError::Csv(_) | DickeError::Json(_) => CliError::Io(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// Run `f` on a rayon pool of `threads` workers (all cores when `None`).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be >= 1".into()));
        }
        b = b.num_threads(n);
    }
    let pool = b.build().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(pool.install(f))
}

pub(crate) fn output_path(cfg: &ResolvedConfig, suffix: &str) -> Result<PathBuf, CliError> {
    let dir = Path::new(&cfg.output.dir);
    fs::create_dir_all(dir)?;
    Ok(dir.join(format!("{}_{suffix}", cfg.name)))
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub(crate) fn create(path: &Path) -> Result<std::io::BufWriter<fs::File>, CliError> {
    Ok(std::io::BufWriter::new(fs::File::create(path)?))
}
