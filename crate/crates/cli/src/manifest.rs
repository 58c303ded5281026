//! Run manifests: every output file is accompanied by a manifest recording
//! the exact command, seeds, input/output digests, and wall-clock time, so a
//! run can be reproduced and its artifacts tied together.

use serde_json::json;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const MANIFEST_FORMAT: &str = "pebbleforge-manifest/1";

pub struct ManifestBuilder {
    started: Instant,
    command: Vec<String>,
    seed: Option<u64>,
    inputs: Vec<(PathBuf, String)>,
    outputs: Vec<(PathBuf, String)>,
    caps_hit: Vec<String>,
}

fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl ManifestBuilder {
    pub fn new() -> ManifestBuilder {
        ManifestBuilder {
            started: Instant::now(),
            command: std::env::args().collect(),
            seed: None,
            inputs: Vec::new(),
            outputs: Vec::new(),
            caps_hit: Vec::new(),
        }
    }

    pub fn seed(&mut self, seed: u64) {
        self.seed = Some(seed);
    }

    pub fn record_input(&mut self, path: &Path, bytes: &[u8]) {
        self.inputs.push((path.to_path_buf(), digest(bytes)));
    }

    pub fn cap_hit(&mut self, what: impl Into<String>) {
        self.caps_hit.push(what.into());
    }

    /// Write an output file and remember its digest.
    pub fn write_output(&mut self, path: &Path, bytes: &[u8]) -> std::io::Result<()> {
        std::fs::write(path, bytes)?;
        self.outputs.push((path.to_path_buf(), digest(bytes)));
        Ok(())
    }

    /// Write `<primary>.manifest.json`.
    pub fn finish(self, primary: &Path) -> std::io::Result<()> {
        let entry = |v: &[(PathBuf, String)]| -> Vec<serde_json::Value> {
            v.iter()
                .map(|(p, d)| json!({"path": p.display().to_string(), "sha256": d}))
                .collect()
        };
        let manifest = json!({
            "format": MANIFEST_FORMAT,
            "command": self.command,
            "version": env!("CARGO_PKG_VERSION"),
            "seed": self.seed,
            "inputs": entry(&self.inputs),
            "outputs": entry(&self.outputs),
            "wall_ms": self.started.elapsed().as_millis() as u64,
            "caps_hit": self.caps_hit,
        });
        let mut path = primary.as_os_str().to_owned();
        path.push(".manifest.json");
        std::fs::write(PathBuf::from(path), serde_json::to_vec_pretty(&manifest)?)
    }
}
