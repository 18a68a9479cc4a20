use std::fs;
use std::path::Path;
use std::time::Duration;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Artifact {
    /// File name relative to the output directory.
    pub path: String,
    pub sha256: String,
}

/// Record of one invocation, written as `manifest.json` next to its outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: &'static str,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub replicas: Option<u64>,
    pub outputs: Vec<Artifact>,
    pub wall_clock_seconds: f64,
}

impl RunManifest {
    pub fn new(command: impl Into<String>, config: serde_json::Value, seed: Option<u64>, replicas: Option<u64>) -> Self {
        RunManifest {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION"),
            config,
            seed,
            replicas,
            outputs: Vec::new(),
            wall_clock_seconds: 0.0,
        }
    }

    /// Hashes `dir/name` and records it.
    pub fn add(&mut self, dir: &Path, name: &str) -> Result<(), CliError> {
        let bytes = fs::read(dir.join(name))?;
        self.outputs.push(Artifact { path: name.to_string(), sha256: hex::encode(Sha256::digest(&bytes)) });
        Ok(())
    }

    pub fn write(mut self, dir: &Path, elapsed: Duration) -> Result<(), CliError> {
        self.wall_clock_seconds = elapsed.as_secs_f64();
        let text = serde_json::to_string_pretty(&self).map_err(|e| CliError::Config(e.to_string()))?;
        fs::write(dir.join("manifest.json"), text + "\n")?;
        Ok(())
    }
}
