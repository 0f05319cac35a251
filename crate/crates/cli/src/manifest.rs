//! Per-run manifest written next to the outputs.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    /// SHA-256 of the canonical configuration text (seed included).
    pub config_hash: String,
    pub code_version: String,
    pub subcommand: String,
    /// Output files relative to the output directory.
    pub outputs: Vec<String>,
    pub wall_clock_seconds: f64,
    pub seed: u64,
}

pub fn config_hash(canonical: &str) -> String {
    Sha256::digest(canonical.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        let text = toml::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(dir.join("manifest.toml"), text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_hex_sha256() {
        let h = config_hash("");
        assert_eq!(h, "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
        assert_ne!(config_hash("seed = 1"), config_hash("seed = 2"));
    }
}
