//! Output bookkeeping and the per-run manifest.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Git-style blob hash: SHA-256 of `"blob <len>\0"` followed by the bytes.
pub fn blob_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    hex::encode(h.finalize())
}

#[derive(Clone, Debug, Serialize)]
pub struct InputFile {
    pub path: String,
    pub hash: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub workers: usize,
    pub config: serde_json::Value,
    pub inputs: Vec<InputFile>,
    /// Hash over the input hashes in order; stable for identical inputs.
    pub input_hash: String,
    pub outputs: Vec<String>,
    pub wall_clock_seconds: f64,
    pub diagnostics: serde_json::Value,
    /// Present when the run failed; outputs then list what was written first.
    pub error: Option<String>,
    pub exit_code: i32,
}

/// Hashes the config and every file it references.
pub fn hash_inputs(files: &[PathBuf]) -> CliResult<(Vec<InputFile>, String)> {
    let mut inputs = Vec::new();
    for path in files {
        let bytes = std::fs::read(path).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        inputs.push(InputFile {
            path: path.display().to_string(),
            hash: blob_hash(&bytes),
        });
    }
    let joined: String = inputs.iter().map(|i| format!("{}\n", i.hash)).collect();
    let combined = blob_hash(joined.as_bytes());
    Ok((inputs, combined))
}

/// Writes files into the output directory and remembers their names.
pub struct OutputDir {
    dir: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> CliResult<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).map_err(|source| CliError::Io { path, source })?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let text = serde_json::to_string_pretty(value).map_err(telefock::Error::from)? + "\n";
        self.write(name, &text)
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }

    /// Writes `manifest.json`, which lists every other file.
    pub fn finish(self, manifest: &RunManifest) -> CliResult<()> {
        let text = serde_json::to_string_pretty(manifest).map_err(telefock::Error::from)? + "\n";
        let path = self.dir.join("manifest.json");
        std::fs::write(&path, text).map_err(|source| CliError::Io { path, source })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blob_hash_is_content_addressed() {
        assert_eq!(blob_hash(b"abc"), blob_hash(b"abc"));
        assert_ne!(blob_hash(b"abc"), blob_hash(b"abd"));
        assert_ne!(blob_hash(b""), blob_hash(b"\0"));
        assert_eq!(blob_hash(b"x").len(), 64);
    }
}
