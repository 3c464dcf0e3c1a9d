//! Configuration, evaluation and CSV output behind the `maser` binary.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod run;
pub mod table;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use config::{parse_config, Mode, RunConfig};
pub use run::{run, run_dynamics, run_grid, run_stationary, run_sweep};
pub use table::{Cell, Table};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("invariant failure: {0}")]
    Invariant(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] maser_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Invariant(_) | CliError::Numerical(_) => 3,
            CliError::Io(_) | CliError::Csv(_) => 1,
        }
    }
}

/// `out.csv` → `out.meta.json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("meta.json")
}

/// Read, resolve and run a config file, writing the CSV and its sidecar.
pub fn execute(
    mode: Mode,
    config: &Path,
    out: &Path,
    workers: Option<usize>,
) -> Result<Table, CliError> {
    let text = std::fs::read_to_string(config)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", config.display())))?;
    let cfg = parse_config(&text)?.resolve(mode)?;
    let workers = workers
        .or(cfg.workers)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if workers == 0 {
        return Err(CliError::Config("--workers must be at least 1".into()));
    }
    let table = run(&cfg, mode, workers)?;
    let file = std::fs::File::create(out)?;
    table.write_csv(std::io::BufWriter::new(file))?;
    let meta = run::metadata(&cfg, mode, workers, &table);
    let mut text = serde_json::to_string_pretty(&meta).map_err(std::io::Error::other)?;
    text.push('\n');
    std::fs::write(sidecar_path(out), text)?;
    Ok(table)
}
