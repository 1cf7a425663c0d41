//! Content-digest manifest of emitted artifacts for reproducibility checks.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub fn digest_file(path: &Path) -> Result<String> {
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = file.read(&mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    /// Digest of the loaded config serialized as canonical JSON.
    pub config_digest: String,
    /// Artifact path (relative to the output directory) -> sha256.
    pub entries: BTreeMap<String, String>,
}

impl Manifest {
    pub fn new<C: Serialize>(config: &C) -> Result<Self> {
        let snapshot = serde_json::to_vec(config)?;
        Ok(Manifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_digest: hex::encode(Sha256::digest(&snapshot)),
            entries: BTreeMap::new(),
        })
    }

    /// Record `path`, stored relative to `root`.
    pub fn add_file(&mut self, root: &Path, path: &Path) -> Result<()> {
        let key = path
            .strip_prefix(root)
            .unwrap_or(path)
            .to_string_lossy()
            .into_owned();
        self.entries.insert(key, digest_file(path)?);
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer_pretty(BufWriter::new(file), self)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Check every listed file still matches its recorded digest.
    pub fn verify(&self, root: &Path) -> Result<Vec<String>> {
        let mut mismatches = Vec::new();
        for (rel, expected) in &self.entries {
            let path = root.join(rel);
            if !path.is_file() || &digest_file(&path)? != expected {
                mismatches.push(rel.clone());
            }
        }
        Ok(mismatches)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_round_trip_and_verify() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.txt");
        fs::write(&a, "alpha").unwrap();
        let mut manifest = Manifest::new(&serde_json::json!({"seed": 7})).unwrap();
        manifest.add_file(dir.path(), &a).unwrap();
        let path = dir.path().join("manifest.json");
        manifest.write(&path).unwrap();

        let loaded = Manifest::load(&path).unwrap();
        assert_eq!(loaded.entries, manifest.entries);
        assert!(loaded.verify(dir.path()).unwrap().is_empty());

        fs::write(&a, "beta").unwrap();
        assert_eq!(loaded.verify(dir.path()).unwrap(), vec!["a.txt".to_string()]);
    }

    #[test]
    fn digest_matches_known_value() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x");
        fs::write(&path, "abc").unwrap();
        assert_eq!(
            digest_file(&path).unwrap(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
