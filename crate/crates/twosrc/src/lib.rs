//! Front end for `twosrc-core`: exponent sweeps, receiver simulations,
//! Helstrom tables and PSF self-checks, written as CSV or JSON.

pub mod commands;
pub mod config;
pub mod output;
pub mod parallel;

use std::io::Write;

pub use commands::{run, CommandOutput};
pub use config::{Command, OutputFormat, RunConfig, Settings, Sweep};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Compute(#[from] twosrc_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 for bad invocations, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::Compute(twosrc_core::Error::UnsupportedRule | twosrc_core::Error::UnsupportedMeasurement) => 2,
            _ => 1,
        }
    }
}

/// Runs `config` and writes its output to `--out` or `stdout`.
/// Returns the process exit status.
pub fn execute(config: &RunConfig, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let out = run(config)?;
    match &config.out {
        Some(path) => {
            let file = std::fs::File::create(path)
                .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
            let mut w = std::io::BufWriter::new(file);
            out.write(config.format, &mut w)?;
            w.flush()?;
        }
        None => out.write(config.format, stdout)?,
    }
    Ok(match &out.failure {
        Some(_) => 1,
        None => 0,
    })
}
