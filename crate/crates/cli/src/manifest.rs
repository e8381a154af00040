//! Artifact writing and the SHA-256 manifest.

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const MANIFEST_NAME: &str = "manifest.sha256";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub data: Vec<u8>,
}

impl Artifact {
    pub fn bytes(name: impl Into<String>, data: Vec<u8>) -> Self {
        Self { name: name.into(), data }
    }

    pub fn text(name: impl Into<String>, text: String) -> Self {
        Self::bytes(name, text.into_bytes())
    }
}

pub fn sha256_hex(data: &[u8]) -> String {
    hex::encode(Sha256::digest(data))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifestEntry {
    pub name: String,
    pub sha256: String,
    pub size: usize,
}

/// Every artifact of a run with its content hash, sorted by name. The file
/// form is the `sha256sum` text format.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Manifest {
    pub dir: PathBuf,
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn write(dir: &Path, artifacts: Vec<Artifact>) -> Result<Manifest> {
        let mut names: Vec<&str> = artifacts.iter().map(|a| a.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) || names.contains(&MANIFEST_NAME) {
            return Err(CliError::Io("duplicate artifact name".into()));
        }
        fs::create_dir_all(dir)?;
        let mut entries = Vec::with_capacity(artifacts.len());
        for a in &artifacts {
            fs::write(dir.join(&a.name), &a.data)?;
            entries.push(ManifestEntry {
                name: a.name.clone(),
                sha256: sha256_hex(&a.data),
                size: a.data.len(),
            });
        }
        entries.sort_by(|a, b| a.name.cmp(&b.name));
        let m = Manifest {
            dir: dir.to_path_buf(),
            entries,
        };
        fs::write(dir.join(MANIFEST_NAME), m.to_text())?;
        Ok(m)
    }

    pub fn to_text(&self) -> String {
        self.entries.iter().map(|e| format!("{}  {}\n", e.sha256, e.name)).collect()
    }

    /// Re-hashes the files on disk and returns the names that differ.
    pub fn verify(&self) -> Result<Vec<String>> {
        let mut bad = Vec::new();
        for e in &self.entries {
            let data = fs::read(self.dir.join(&e.name))?;
            if sha256_hex(&data) != e.sha256 {
                bad.push(e.name.clone());
            }
        }
        Ok(bad)
    }

    pub fn hash_of(&self, name: &str) -> Option<&str> {
        self.entries.iter().find(|e| e.name == name).map(|e| e.sha256.as_str())
    }
}
