//! Machine-readable record of an invocation.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use workday_core::{MasterSeed, SweepResult};

use crate::config::Effective;
use crate::CliError;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FileEntry {
    /// File name relative to the manifest's directory.
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PointTiming {
    pub eta: f64,
    pub q: f64,
    #[serde(rename = "D")]
    pub max_duration: u32,
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub master_seed: u64,
    /// Effective configuration; absent for `validate`.
    pub config: Option<serde_json::Value>,
    pub files: Vec<FileEntry>,
    pub total_seconds: f64,
    pub points: Vec<PointTiming>,
}

/// Lowercase hex SHA-256 of `data`.
pub fn sha256_hex(data: &[u8]) -> String {
    Sha256::digest(data).iter().map(|b| format!("{b:02x}")).collect()
}

fn entry(path: &Path) -> Result<FileEntry, CliError> {
    let data =
        std::fs::read(path).map_err(|e| CliError::Runtime(format!("cannot read back {}: {e}", path.display())))?;
    Ok(FileEntry {
        path: path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
        bytes: data.len() as u64,
        sha256: sha256_hex(&data),
    })
}

impl Manifest {
    pub fn build(
        effective: &Effective,
        files: &[PathBuf],
        result: &SweepResult,
        elapsed: Duration,
    ) -> Result<Self, CliError> {
        Ok(Manifest {
            tool: "workday".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            master_seed: effective.master_seed,
            config: Some(serde_json::to_value(effective).expect("config serializes")),
            files: files.iter().map(|f| entry(f)).collect::<Result<_, _>>()?,
            total_seconds: elapsed.as_secs_f64(),
            points: result
                .sorted()
                .into_iter()
                .map(|p| PointTiming {
                    eta: p.point.realized_eta(),
                    q: p.point.params.contact_rate,
                    max_duration: p.point.params.max_duration,
                    seconds: p.wall_clock.as_secs_f64(),
                })
                .collect(),
        })
    }

    pub fn for_validate(seed: MasterSeed, report: &Path, elapsed: Duration) -> Result<Self, CliError> {
        Ok(Manifest {
            tool: "workday".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            master_seed: seed.0,
            config: None,
            files: vec![entry(report)?],
            total_seconds: elapsed.as_secs_f64(),
            points: Vec::new(),
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    /// Files whose on-disk checksum no longer matches, relative to `dir`.
    pub fn mismatches(&self, dir: &Path) -> Vec<String> {
        self.files
            .iter()
            .filter(|f| match std::fs::read(dir.join(&f.path)) {
                Ok(data) => sha256_hex(&data) != f.sha256 || data.len() as u64 != f.bytes,
                Err(_) => true,
            })
            .map(|f| f.path.clone())
            .collect()
    }
}
