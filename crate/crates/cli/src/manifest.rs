//! Output files plus a manifest that pins how to regenerate them.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};

pub const MANIFEST: &str = "manifest.json";
/// Wall-clock time lives outside the manifest so reruns stay byte-identical.
pub const TIMING: &str = "timing.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub software: String,
    pub command: String,
    pub config_sha256: String,
    pub config: serde_json::Value,
    pub seeds: Vec<u64>,
    pub files: Vec<FileEntry>,
}

#[derive(Debug, Serialize)]
struct Timing {
    command: String,
    wall_clock_seconds: f64,
}

/// Files collected in memory and written together with the manifest.
pub struct OutputSet {
    command: String,
    started: Instant,
    files: Vec<(String, Vec<u8>)>,
}

impl OutputSet {
    pub fn new(command: &str) -> Self {
        OutputSet {
            command: command.to_string(),
            started: Instant::now(),
            files: Vec::new(),
        }
    }

    pub fn add(&mut self, name: impl Into<String>, contents: impl Into<Vec<u8>>) {
        self.files.push((name.into(), contents.into()));
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    /// Writes every file, then `manifest.json` and `timing.json`. Returns
    /// the written paths, manifest last but one.
    pub fn finish(self, out_dir: &Path, config: Option<&ExperimentConfig>, seeds: Vec<u64>) -> CliResult<Vec<PathBuf>> {
        std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
        let mut written = Vec::new();
        let mut entries = Vec::new();
        for (name, bytes) in &self.files {
            let path = out_dir.join(name);
            std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
            entries.push(FileEntry {
                path: name.clone(),
                bytes: bytes.len(),
                sha256: sha256_hex(bytes),
            });
            written.push(path);
        }
        let manifest = RunManifest {
            software: format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
            command: self.command.clone(),
            config_sha256: config.map(|c| c.hash()).unwrap_or_default(),
            config: config
                .map(|c| serde_json::to_value(c).expect("config serializes"))
                .unwrap_or(serde_json::Value::Null),
            seeds,
            files: entries,
        };
        let path = out_dir.join(MANIFEST);
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        written.push(path);
        let timing = Timing {
            command: self.command,
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
        };
        let path = out_dir.join(TIMING);
        let text = serde_json::to_string_pretty(&timing).expect("timing serializes") + "\n";
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        written.push(path);
        Ok(written)
    }
}
