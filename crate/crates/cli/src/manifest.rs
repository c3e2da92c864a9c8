use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
struct Artifact {
    path: PathBuf,
    sha256: String,
}

/// Run record written to `<out>/manifest.json` by every command.
#[derive(Debug, Serialize)]
pub struct Manifest {
    command: String,
    config: serde_json::Value,
    inputs: Vec<PathBuf>,
    outputs: Vec<Artifact>,
    seed: Option<u64>,
    wall_clock_seconds: f64,
    #[serde(skip)]
    started: Option<Instant>,
}

impl Manifest {
    pub fn start(command: &str, seed: Option<u64>) -> Self {
        Manifest {
            command: command.to_string(),
            config: serde_json::Value::Null,
            inputs: Vec::new(),
            outputs: Vec::new(),
            seed,
            wall_clock_seconds: 0.0,
            started: Some(Instant::now()),
        }
    }

    pub fn config(&mut self, config: impl Serialize) -> Result<()> {
        self.config = serde_json::to_value(config)?;
        Ok(())
    }

    pub fn input(&mut self, path: &Path) {
        self.inputs.push(path.to_path_buf());
    }

    /// Writes `bytes` to `path` and records its checksum.
    pub fn write_output(&mut self, path: &Path, bytes: &[u8]) -> Result<()> {
        std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.push(Artifact {
            path: path.to_path_buf(),
            sha256: hex::encode(Sha256::digest(bytes)),
        });
        Ok(())
    }

    pub fn finish(mut self, out_dir: &Path) -> Result<()> {
        self.wall_clock_seconds = self
            .started
            .take()
            .map_or(0.0, |t| t.elapsed().as_secs_f64());
        let path = out_dir.join("manifest.json");
        let json = serde_json::to_string_pretty(&self)?;
        std::fs::write(&path, json).with_context(|| format!("writing {}", path.display()))
    }
}
