use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    /// SHA-256 of the canonical JSON form of `config`.
    pub config_digest: String,
    pub seed: Option<u64>,
    pub artifacts: Vec<PathBuf>,
    pub tool_version: String,
}

impl RunManifest {
    pub fn new(
        command: &str,
        config: &impl Serialize,
        seed: Option<u64>,
    ) -> Result<Self, CliError> {
        let config = serde_json::to_value(config).map_err(|e| CliError::Runtime(e.to_string()))?;
        // serde_json maps keep keys sorted, so this encoding is canonical
        let canonical =
            serde_json::to_vec(&config).map_err(|e| CliError::Runtime(e.to_string()))?;
        Ok(RunManifest {
            command: command.to_string(),
            config,
            config_digest: hex::encode(Sha256::digest(&canonical)),
            seed,
            artifacts: Vec::new(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        })
    }

    /// Writes the manifest as `{stem}_manifest.json` in `dir` and returns
    /// its path.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<PathBuf, CliError> {
        let path = dir.join(format!("{stem}_manifest.json"));
        let text =
            serde_json::to_string_pretty(self).map_err(|e| CliError::Runtime(e.to_string()))?;
        fs::write(&path, text + "\n")
            .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn digest_ignores_key_order() {
        let mut a = HashMap::new();
        a.insert("x", 1);
        a.insert("y", 2);
        let b: std::collections::BTreeMap<_, _> = a.iter().map(|(k, v)| (*k, *v)).collect();
        let ma = RunManifest::new("t", &a, Some(1)).unwrap();
        let mb = RunManifest::new("t", &b, Some(1)).unwrap();
        assert_eq!(ma.config_digest, mb.config_digest);
        assert_eq!(ma.config_digest.len(), 64);
    }
}
