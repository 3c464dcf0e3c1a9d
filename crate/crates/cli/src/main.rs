use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use maser_cli::{execute, Mode};

/// Stationary thermodynamics, heat decomposition, power fluctuations and
/// dynamics of a driven three-level maser engine.
#[derive(Debug, Parser)]
#[command(name = "maser", version)]
struct Args {
    #[arg(value_enum)]
    mode: Mode,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// CSV output path; metadata goes next to it as `.meta.json`.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads for grid modes (the output does not depend on it).
    #[arg(long)]
    workers: Option<usize>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(args.mode, &args.config, &args.out, args.workers) {
        Ok(table) => {
            eprintln!("wrote {} rows to {}", table.rows.len(), args.out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("maser: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
