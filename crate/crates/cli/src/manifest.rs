use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

/// Record of one run, written as `manifest.json` next to its outputs.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: &'static str,
    pub version: &'static str,
    pub config: Value,
    pub seed: Option<u64>,
    pub timings: Vec<(String, f64)>,
    pub outputs: Vec<PathBuf>,
    #[serde(skip)]
    started: Instant,
}

impl Manifest {
    pub fn new(command: &'static str, config: impl Serialize, seed: Option<u64>) -> Result<Self> {
        Ok(Self {
            command,
            version: env!("CARGO_PKG_VERSION"),
            config: serde_json::to_value(config)?,
            seed,
            timings: Vec::new(),
            outputs: Vec::new(),
            started: Instant::now(),
        })
    }

    pub fn time(&mut self, label: impl Into<String>, seconds: f64) {
        self.timings.push((label.into(), seconds));
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.to_path_buf());
    }

    pub fn write(mut self, dir: &Path) -> Result<()> {
        self.time("total", self.started.elapsed().as_secs_f64());
        let path = dir.join("manifest.json");
        self.outputs.push(path.clone());
        let json = serde_json::to_string_pretty(&self)?;
        fs::write(&path, json).with_context(|| format!("cannot write {}", path.display()))
    }
}

pub fn prepare_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))
}
