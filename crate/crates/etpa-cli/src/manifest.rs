//! Checksummed listing of everything a run wrote.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{CliError, Result};

pub const MANIFEST_NAME: &str = "manifest.toml";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Relative to the output directory, `/`-separated.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config_sha256: String,
    pub etpa_version: String,
    pub cli_version: String,
    pub created_unix: u64,
    pub files: Vec<FileEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

fn walk(root: &Path, dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|err| CliError::io(dir, err)))
        .collect::<Result<_>>()?;
    entries.sort();
    for p in entries {
        if p.is_dir() {
            walk(root, &p, out)?;
        } else if p != root.join(MANIFEST_NAME) {
            out.push(p);
        }
    }
    Ok(())
}

/// Hashes every file under `dir` (except the manifest itself) and writes
/// `manifest.toml` there.
pub fn write_manifest(dir: &Path, config_text: &str) -> Result<Manifest> {
    let mut files = Vec::new();
    walk(dir, dir, &mut files)?;
    let mut entries = Vec::with_capacity(files.len());
    for f in files {
        let bytes = std::fs::read(&f).map_err(|e| CliError::io(&f, e))?;
        let rel = f.strip_prefix(dir).unwrap_or(&f);
        let path = rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
        entries.push(FileEntry { path, sha256: sha256_hex(&bytes), bytes: bytes.len() as u64 });
    }
    let manifest = Manifest {
        config_sha256: sha256_hex(config_text.as_bytes()),
        etpa_version: etpa::VERSION.into(),
        cli_version: env!("CARGO_PKG_VERSION").into(),
        created_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        files: entries,
    };
    let text = toml::to_string(&manifest).map_err(|e| CliError::Config(e.to_string()))?;
    let path = dir.join(MANIFEST_NAME);
    std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    Ok(manifest)
}

/// Files whose content no longer matches the manifest, or that it misses.
pub fn verify(dir: &Path) -> Result<Vec<String>> {
    let path = dir.join(MANIFEST_NAME);
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    let m: Manifest = toml::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
    let mut on_disk = Vec::new();
    walk(dir, dir, &mut on_disk)?;
    let mut bad = Vec::new();
    for f in on_disk {
        let rel = f.strip_prefix(dir).unwrap_or(&f);
        let key = rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
        let bytes = std::fs::read(&f).map_err(|e| CliError::io(&f, e))?;
        match m.files.iter().find(|e| e.path == key) {
            Some(e) if e.sha256 == sha256_hex(&bytes) => {}
            _ => bad.push(key),
        }
    }
    Ok(bad)
}
