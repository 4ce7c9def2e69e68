//! Run manifest written to the output directory before any data file, tying
//! outputs to the exact configuration, seed, and tool version that produced
//! them.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::AppResult;

pub const MANIFEST_FILE: &str = "run_manifest.toml";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    /// Path of the configuration file, or "<defaults>".
    pub config_path: String,
    /// SHA-256 of the configuration file bytes (of the empty string for
    /// built-in defaults).
    pub config_sha256: String,
    pub seed: u64,
    pub trials: u64,
    /// 0 means the worker count was left to the runtime.
    pub workers: u64,
    pub out_dir: String,
    pub version: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().fold(String::new(), |mut acc, b| {
        use std::fmt::Write;
        let _ = write!(acc, "{b:02x}");
        acc
    })
}

impl RunManifest {
    pub fn write(&self, out_dir: &Path) -> AppResult<()> {
        let text = toml::to_string_pretty(self)
            .map_err(|e| crate::error::AppError::Io(e.to_string()))?;
        fs::write(out_dir.join(MANIFEST_FILE), text)?;
        Ok(())
    }

    pub fn load(path: &Path) -> AppResult<Self> {
        let text = fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| crate::error::AppError::Config(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_input_hash_is_stable() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
