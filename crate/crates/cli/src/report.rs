//! Artifact writing: provenance headers, CSV files, JSON reports.
//!
//! Outputs carry no timestamps or machine state, so a rerun with the same
//! seed and config produces byte-identical files.

use serde::Serialize;
use std::fs;
use std::path::{Path, PathBuf};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance block embedded in every artifact.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool_version: String,
    pub command: String,
    pub seed: u64,
    pub config_hash: String,
}

impl Provenance {
    pub fn new(command: &str, seed: u64, config_bytes: &[u8]) -> Self {
        Self {
            tool_version: TOOL_VERSION.to_string(),
            command: command.to_string(),
            seed,
            config_hash: format!("{:016x}", fnv1a64(config_bytes)),
        }
    }

    /// Comment header line for CSV artifacts.
    pub fn csv_comment(&self, params: &str) -> String {
        format!(
            "# randls v{} command={} seed={} config={} {}",
            self.tool_version, self.command, self.seed, self.config_hash, params
        )
    }
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

pub fn write_csv(
    dir: &Path,
    name: &str,
    comment: &str,
    header: &str,
    rows: &[String],
) -> std::io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut text = String::new();
    text.push_str(comment);
    text.push('\n');
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(row);
        text.push('\n');
    }
    fs::write(&path, text)?;
    Ok(path)
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> std::io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    fs::write(&path, text)?;
    Ok(path)
}
