//! The full default suite and manifest replays.

use std::path::Path;

use serde::Deserialize;

use crate::error::{io_err, Error, Result};
use crate::exec::Context;
use crate::experiments::{run_experiment, run_in_memory, ExperimentSpec, NAMES};
use crate::manifest::{sha256_hex, Manifest};

/// Runs every experiment with its shipped config into `out/<name>/`.
pub fn run_suite(out: &Path, seed: u64, jobs: usize) -> Result<Vec<Manifest>> {
    NAMES
        .iter()
        .map(|name| {
            run_experiment(&ExperimentSpec {
                name: (*name).to_owned(),
                config: None,
                seed,
                out: out.join(name),
                overrides: Vec::new(),
                jobs,
            })
        })
        .collect()
}

/// An output whose hash differs from the one recorded in the manifest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub file: String,
    pub expected: Option<String>,
    pub found: Option<String>,
}

/// Reruns the experiment recorded in a manifest, in memory, and lists every
/// output that does not come back byte-identical.
pub fn replay(manifest: &Path, jobs: usize) -> Result<Vec<Mismatch>> {
    let text = std::fs::read_to_string(manifest).map_err(io_err(manifest))?;
    let m = Manifest::deserialize(&mut serde_json::Deserializer::from_str(&text))?;
    if sha256_hex(m.config.as_bytes()) != m.config_sha256 {
        return Err(Error::Config(format!("{}: config hash does not match its text", manifest.display())));
    }
    let ctx = Context::new(m.seed, jobs)?;
    let (_, out) = run_in_memory(&m.experiment, &m.config, &[], &ctx)?;
    let mut bad = Vec::new();
    for (file, entry) in &m.outputs {
        let found = out.files.get(file).map(|b| sha256_hex(b));
        if found.as_deref() != Some(entry.sha256.as_str()) {
            bad.push(Mismatch { file: file.clone(), expected: Some(entry.sha256.clone()), found });
        }
    }
    for (file, bytes) in &out.files {
        if !m.outputs.contains_key(file) {
            bad.push(Mismatch { file: file.clone(), expected: None, found: Some(sha256_hex(bytes)) });
        }
    }
    Ok(bad)
}
