//! Run manifests: a sidecar JSON record of exactly how an output file was
//! produced.
//!
//! Re-running the stored `argv` (with `--out` redirected anywhere) must
//! reproduce every listed data file byte for byte; only the timestamp field
//! is excluded from that contract.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::CliError;

/// Data-file schema version recorded in every manifest.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool: String,
    pub tool_version: String,
    pub command: String,
    /// Full command line after the binary name; replayable verbatim.
    pub argv: Vec<String>,
    pub seed: u64,
    /// Data files this run produced, relative to the manifest's directory.
    pub outputs: Vec<String>,
    /// Excluded from reproducibility comparisons.
    pub timestamp: String,
    /// Resolved parameter values after defaulting.
    pub params: serde_json::Value,
}

impl RunManifest {
    pub fn new(
        command: &str,
        argv: &[String],
        seed: u64,
        outputs: Vec<String>,
        params: serde_json::Value,
    ) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool: "quoin".to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            argv: argv.to_vec(),
            seed,
            outputs,
            timestamp: chrono::Utc::now().to_rfc3339(),
            params,
        }
    }

    /// Sidecar path for a data file: `<file>.manifest.json`.
    pub fn sidecar_path(data_file: &Path) -> PathBuf {
        let mut name = data_file
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        name.push_str(".manifest.json");
        data_file.with_file_name(name)
    }

    pub fn write_beside(&self, data_file: &Path) -> Result<PathBuf, CliError> {
        let path = Self::sidecar_path(data_file);
        let body = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(&path, body + "\n").map_err(CliError::io(&path))?;
        Ok(path)
    }
}
