//! Run manifests: enough to rerun an experiment and check that every output
//! file comes back byte-identical.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const CONFIG_FILE: &str = "config.toml";

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputEntry {
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub experiment: String,
    pub seed: u64,
    pub config_sha256: String,
    /// Resolved configuration, canonical TOML.
    pub config: String,
    pub versions: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, OutputEntry>,
    pub violations: Vec<String>,
}

impl Manifest {
    pub fn new(experiment: &str, seed: u64, config: &str, files: &BTreeMap<String, Vec<u8>>, violations: &[String]) -> Self {
        let versions = [("texel", env!("CARGO_PKG_VERSION")), ("texel-core", texel_core::VERSION)]
            .into_iter()
            .map(|(k, v)| (k.to_owned(), v.to_owned()))
            .collect();
        let outputs =
            files.iter().map(|(name, b)| (name.clone(), OutputEntry { sha256: sha256_hex(b), bytes: b.len() as u64 })).collect();
        Self {
            experiment: experiment.to_owned(),
            seed,
            config_sha256: sha256_hex(config.as_bytes()),
            config: config.to_owned(),
            versions,
            outputs,
            violations: violations.to_vec(),
        }
    }
}
