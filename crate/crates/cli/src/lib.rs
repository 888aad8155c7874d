//! Library side of the `psqm` command: configuration, commands and report
//! rendering. The binary in `main.rs` only parses flags and writes files.

pub mod commands;
pub mod config;
pub mod report;

use std::fmt;
use std::fs;
use std::path::Path;

pub use commands::run;
pub use config::{Command, Format, RunConfig};
pub use report::{RunReport, Table};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Solver(String),
    Io(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Solver(m) => write!(f, "{m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<config::ConfigError> for CliError {
    fn from(e: config::ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

/// Write every table plus `report.json` into `dir`.
pub fn write_outputs(report: &RunReport, dir: &Path, format: Format) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(io)?;
    for t in &report.data {
        let (name, body) = match format {
            Format::Csv => (format!("{}.csv", t.name), t.to_csv()),
            Format::Json => (format!("{}.json", t.name), t.to_json()),
        };
        fs::write(dir.join(name), body).map_err(io)?;
    }
    fs::write(dir.join("report.json"), report.to_json_index()).map_err(io)?;
    Ok(())
}

/// Text for stdout when no output directory is given: the first table as
/// CSV, or the whole report as JSON.
pub fn stdout_text(report: &RunReport, format: Format) -> String {
    match format {
        Format::Csv => report.data.first().map(Table::to_csv).unwrap_or_default(),
        Format::Json => report.to_json_full(),
    }
}
