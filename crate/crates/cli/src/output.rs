//! Artifact writing: CSV tables, run manifests and file digests.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Twelve significant digits in scientific notation.
pub fn num(v: f64) -> String {
    format!("{v:.11e}")
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("creating {}: {e}", dir.display())))?;
    }
    gks_rom::io::write_atomic(path, bytes).map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))
}

/// CSV text with a comment header carrying the config hash.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(config_hash: &str, command: &str, columns: &[&str]) -> Self {
        let text = format!(
            "# config_hash: {config_hash}\n# gksrom {} {command}\n{}\n",
            env!("CARGO_PKG_VERSION"),
            columns.join(",")
        );
        Csv { text }
    }

    pub fn row<I, S>(&mut self, cells: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let cells: Vec<String> = cells.into_iter().map(|c| c.as_ref().to_string()).collect();
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        write_bytes(path, self.text.as_bytes())
    }
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileRecord {
    pub path: PathBuf,
    pub sha256: String,
}

impl FileRecord {
    pub fn of(path: &Path) -> Result<Self, CliError> {
        Ok(FileRecord { path: path.to_path_buf(), sha256: sha256_file(path)? })
    }
}

/// Everything needed to repeat a run: the effective configuration, the
/// command line, seeds and input digests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub arguments: Vec<String>,
    pub config_hash: String,
    pub config: String,
    pub seeds: Vec<u64>,
    pub inputs: Vec<FileRecord>,
    pub outputs: Vec<FileRecord>,
    pub timings_seconds: BTreeMap<String, f64>,
    pub results: serde_json::Map<String, serde_json::Value>,
}

impl RunManifest {
    pub fn new(command: &str, config_hash: String, config: String) -> Self {
        RunManifest {
            tool: "gksrom".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            arguments: std::env::args().skip(1).collect(),
            config_hash,
            config,
            seeds: Vec::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            timings_seconds: BTreeMap::new(),
            results: serde_json::Map::new(),
        }
    }

    pub fn input(&mut self, path: &Path) -> Result<(), CliError> {
        self.inputs.push(FileRecord::of(path)?);
        Ok(())
    }

    pub fn output(&mut self, path: &Path) -> Result<(), CliError> {
        self.outputs.push(FileRecord::of(path)?);
        Ok(())
    }

    pub fn result(&mut self, key: &str, value: impl Into<serde_json::Value>) {
        self.results.insert(key.into(), value.into());
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        write_bytes(path, text.as_bytes())
    }
}
