//! Data-file writers: CSV with one header row, or newline-delimited JSON.
//!
//! Rows are serde structs, so column names and order are fixed by the row
//! type declarations and identical across runs.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    /// Conventional file extension for the format.
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "ndjson",
        }
    }
}

/// Write `rows` to `path` in the requested format.
pub fn write_rows<T: Serialize>(
    path: &Path,
    format: OutputFormat,
    rows: &[T],
) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(CliError::io(parent))?;
        }
    }
    let file = File::create(path).map_err(CliError::io(path))?;
    let mut writer = BufWriter::new(file);
    match format {
        OutputFormat::Csv => {
            let mut csv_writer = csv::Writer::from_writer(writer);
            for row in rows {
                csv_writer.serialize(row).map_err(|e| CliError::Io {
                    path: path.to_path_buf(),
                    source: std::io::Error::other(e),
                })?;
            }
            csv_writer.flush().map_err(CliError::io(path))?;
        }
        OutputFormat::Json => {
            for row in rows {
                let line = serde_json::to_string(row).expect("row serialization is infallible");
                writeln!(writer, "{line}").map_err(CliError::io(path))?;
            }
            writer.flush().map_err(CliError::io(path))?;
        }
    }
    Ok(())
}
