//! Output directories: one manifest.json per directory, written before any
//! other file and rewritten with the output list and wall time at the end.

use dispersia_core::io::{atomic_write, canonical_json};
use dispersia_core::Result;
use serde::Serialize;
use serde_json::Value;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: Value,
    pub tool_version: String,
    pub seed: u64,
    pub outputs: Vec<String>,
    pub wall_time_s: f64,
    pub complete: bool,
}

pub struct OutputDir {
    dir: PathBuf,
    manifest: RunManifest,
    started: Instant,
}

impl OutputDir {
    pub fn create(dir: &Path, command: &str, parameters: Value, seed: u64) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        let out = OutputDir {
            dir: dir.to_path_buf(),
            manifest: RunManifest {
                command: command.into(),
                parameters,
                tool_version: env!("CARGO_PKG_VERSION").into(),
                seed,
                outputs: vec![],
                wall_time_s: 0.0,
                complete: false,
            },
            started: Instant::now(),
        };
        out.save()?;
        Ok(out)
    }

    fn save(&self) -> Result<()> {
        atomic_write(&self.dir.join("manifest.json"), canonical_json(&self.manifest)?.as_bytes())
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        atomic_write(&self.dir.join(name), bytes)?;
        self.record(name);
        Ok(())
    }

    /// Notes a file written into the directory by other code.
    pub fn record(&mut self, name: &str) {
        if !self.manifest.outputs.iter().any(|o| o == name) {
            self.manifest.outputs.push(name.into());
        }
    }

    pub fn finish(mut self) -> Result<()> {
        self.manifest.wall_time_s = self.started.elapsed().as_secs_f64();
        self.manifest.complete = true;
        self.save()
    }
}
