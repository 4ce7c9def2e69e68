//! Shared run setup: configuration loading, flag overrides, output
//! directory, and the manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use dlcz_telecom_core::config::{Config, Resolved};

use crate::error::AppResult;
use crate::manifest::{sha256_hex, RunManifest};

pub struct RunContext {
    pub resolved: Resolved,
    pub out_dir: PathBuf,
}

impl RunContext {
    pub fn prepare(
        subcommand: &str,
        config_path: Option<&Path>,
        out_dir: &Path,
        seed: Option<u64>,
        trials: Option<u64>,
        workers: Option<usize>,
    ) -> AppResult<Self> {
        let (config, config_bytes) = match config_path {
            Some(path) => {
                let bytes = fs::read(path).map_err(|e| {
                    crate::error::AppError::Io(format!("cannot read {}: {e}", path.display()))
                })?;
                let text = String::from_utf8_lossy(&bytes).into_owned();
                (Config::from_str(&text)?, bytes)
            }
            None => (Config::default(), Vec::new()),
        };
        let mut resolved = config.resolve()?;
        if let Some(seed) = seed {
            resolved.seed = seed;
        }
        if let Some(trials) = trials {
            resolved.n_trials = trials.max(1);
        }

        fs::create_dir_all(out_dir)?;
        let manifest = RunManifest {
            subcommand: subcommand.to_string(),
            config_path: config_path
                .map(|p| p.display().to_string())
                .unwrap_or_else(|| "<defaults>".to_string()),
            config_sha256: sha256_hex(&config_bytes),
            seed: resolved.seed,
            trials: resolved.n_trials,
            workers: workers.map(|w| w as u64).unwrap_or(0),
            out_dir: out_dir.display().to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        };
        manifest.write(out_dir)?;

        Ok(Self {
            resolved,
            out_dir: out_dir.to_path_buf(),
        })
    }

    pub fn path(&self, file: &str) -> PathBuf {
        self.out_dir.join(file)
    }
}
