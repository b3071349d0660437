use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Column sets of the CSV outputs.
pub const ESTIMATES_HEADER: [&str; 5] = ["t", "meanB", "ciB", "meanW", "ciW"];
pub const TAIL_HEADER: [&str; 4] = ["x", "upper_bound", "empirical", "se"];
pub const RENEWAL_HEADER: [&str; 2] = ["s", "H"];

/// Shortest round-trip decimal form, so equal bits give equal text.
pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(num).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, Serialize)]
pub struct ManifestEntry {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub command: String,
    pub scenario: String,
    pub scenario_sha256: String,
    pub generated_unix: u64,
    pub files: Vec<ManifestEntry>,
}

/// Collects output files and writes them with a manifest.
#[derive(Debug)]
pub struct Bundle {
    dir: PathBuf,
    files: Vec<(String, Vec<u8>)>,
}

impl Bundle {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Bundle {
            dir: dir.into(),
            files: Vec::new(),
        }
    }

    pub fn add(&mut self, name: impl Into<String>, contents: impl Into<Vec<u8>>) {
        self.files.push((name.into(), contents.into()));
    }

    pub fn add_json<T: Serialize>(&mut self, name: &str, value: &T) {
        let mut text = serde_json::to_string_pretty(value).expect("report types serialize");
        text.push('\n');
        self.add(name, text);
    }

    /// Writes every file and `manifest.json`; returns the written paths.
    pub fn write(self, command: &str, scenario: &str, source: &str) -> CliResult<Vec<PathBuf>> {
        std::fs::create_dir_all(&self.dir).map_err(|e| CliError::io(&self.dir, e))?;
        let mut entries = Vec::with_capacity(self.files.len());
        let mut paths = Vec::with_capacity(self.files.len() + 1);
        for (name, bytes) in &self.files {
            let path = self.dir.join(name);
            write_file(&path, bytes)?;
            entries.push(ManifestEntry {
                path: name.clone(),
                bytes: bytes.len(),
                sha256: sha256_hex(bytes),
            });
            paths.push(path);
        }
        let generated_unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let manifest = Manifest {
            command: command.to_string(),
            scenario: scenario.to_string(),
            scenario_sha256: sha256_hex(source.as_bytes()),
            generated_unix,
            files: entries,
        };
        let path = self.dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');
        write_file(&path, text.as_bytes())?;
        paths.push(path);
        Ok(paths)
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}
