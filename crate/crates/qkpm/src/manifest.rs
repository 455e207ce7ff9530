//! Output-directory manifest: config echo, seeds, tool version and
//! per-file SHA-256. No timestamps, so identical runs give identical bytes.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::io::{read_text, write_json, Meta};
use crate::CliError;

/// `<command>.manifest.json`, so stages sharing a directory keep their own.
pub fn manifest_file(command: &str) -> String {
    format!("{command}.manifest.json")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Canonical TOML of the parsed config.
    pub config: String,
    pub seeds: Vec<u64>,
    pub meta: Meta,
    /// File name to hex SHA-256.
    pub files: BTreeMap<String, String>,
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

impl Manifest {
    pub fn new(command: &str, config: String, seeds: Vec<u64>) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config,
            seeds,
            meta: Meta::new(),
            files: BTreeMap::new(),
        }
    }

    /// Hashes `names` inside `dir` and writes the manifest next to them.
    pub fn finish(mut self, dir: &Path, names: &[String]) -> Result<Self, CliError> {
        for n in names {
            self.files.insert(n.clone(), sha256_file(&dir.join(n))?);
        }
        write_json(&dir.join(manifest_file(&self.command)), &self)?;
        Ok(self)
    }

    pub fn read(dir: &Path, command: &str) -> Result<Self, CliError> {
        serde_json::from_str(&read_text(&dir.join(manifest_file(command)))?).map_err(|e| CliError::Parse(e.to_string()))
    }

    /// Files whose current checksum differs from the recorded one.
    pub fn verify(&self, dir: &Path) -> Result<Vec<String>, CliError> {
        let mut bad = Vec::new();
        for (n, h) in &self.files {
            if &sha256_file(&dir.join(n))? != h {
                bad.push(n.clone());
            }
        }
        Ok(bad)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        let d = std::env::temp_dir().join(format!("qkpm-manifest-{}", std::process::id()));
        std::fs::create_dir_all(&d).unwrap();
        std::fs::write(d.join("a.txt"), "abc").unwrap();
        let m = Manifest::new("test", String::new(), vec![1]).finish(&d, &["a.txt".into()]).unwrap();
        assert_eq!(m.files["a.txt"], "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
        assert!(m.verify(&d).unwrap().is_empty());
        assert_eq!(Manifest::read(&d, "test").unwrap(), m);
    }
}
