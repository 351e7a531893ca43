//! Provenance records written next to every output.

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::io;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: Vec<String>,
    /// SHA-256 of the effective configuration serialized as JSON.
    pub config_hash: String,
    pub seeds: Vec<u64>,
    pub nfe: Option<usize>,
    pub inputs: Vec<FileDigest>,
    /// Seconds since the Unix epoch when the run started.
    pub started_at: u64,
    pub wall_clock_seconds: f64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn digest_file(path: &Path) -> Result<FileDigest> {
    let bytes = std::fs::read(path).map_err(|e| io::not_found_or_io(path, e))?;
    Ok(FileDigest {
        path: path.display().to_string(),
        sha256: sha256_hex(&bytes),
    })
}

pub fn config_hash<T: Serialize>(config: &T) -> Result<String> {
    Ok(sha256_hex(serde_json::to_string(config)?.as_bytes()))
}

/// Collects manifest fields over the course of a run.
#[derive(Debug)]
pub struct ManifestBuilder {
    started: SystemTime,
    manifest: RunManifest,
}

impl ManifestBuilder {
    pub fn start(command: Vec<String>) -> Self {
        let started = SystemTime::now();
        ManifestBuilder {
            started,
            manifest: RunManifest {
                tool: env!("CARGO_PKG_NAME").into(),
                version: env!("CARGO_PKG_VERSION").into(),
                command,
                config_hash: String::new(),
                seeds: Vec::new(),
                nfe: None,
                inputs: Vec::new(),
                started_at: started.duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
                wall_clock_seconds: 0.0,
            },
        }
    }

    pub fn config<T: Serialize>(&mut self, config: &T) -> Result<&mut Self> {
        self.manifest.config_hash = config_hash(config)?;
        Ok(self)
    }

    pub fn input(&mut self, path: &Path) -> Result<&mut Self> {
        self.manifest.inputs.push(digest_file(path)?);
        Ok(self)
    }

    pub fn seeds(&mut self, seeds: &[u64]) -> &mut Self {
        self.manifest.seeds = seeds.to_vec();
        self
    }

    pub fn nfe(&mut self, nfe: usize) -> &mut Self {
        self.manifest.nfe = Some(nfe);
        self
    }

    pub fn finish(&self) -> RunManifest {
        let mut m = self.manifest.clone();
        m.wall_clock_seconds = self.started.elapsed().map_or(0.0, |d| d.as_secs_f64());
        m
    }
}

/// Writes `manifest` as pretty JSON.
pub fn save(path: &Path, manifest: &RunManifest) -> Result<()> {
    io::write(path, serde_json::to_string_pretty(manifest)? + "\n")
}
