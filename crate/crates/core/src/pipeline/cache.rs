//! On-disk artifact cache with an append-only manifest.
//!
//! Each stage writes one text artifact under `<root>/d<d>/` and appends a
//! JSON line to `manifest.jsonl` recording the artifact hash and the hashes
//! of its inputs. A stage is recomputed when its file is missing, its hash no
//! longer matches, or its recorded inputs differ.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const CACHE_ENV: &str = "LGF_CACHE_DIR";

static MANIFEST_LOCK: Mutex<()> = Mutex::new(());

pub fn sha256_hex(data: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(data);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    /// Artifact file name relative to the dimension directory.
    pub file: String,
    pub sha256: String,
    pub inputs: Vec<String>,
}

/// Stage records for one dimension, latest record per file winning.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct RunManifest {
    pub d: usize,
    pub records: Vec<StageRecord>,
}

impl RunManifest {
    pub fn latest(&self, file: &str) -> Option<&StageRecord> {
        self.records.iter().rev().find(|r| r.file == file)
    }

    /// Primes with a cached minimal ODE.
    pub fn primes(&self) -> Vec<u64> {
        let mut ps: Vec<u64> = self
            .records
            .iter()
            .filter(|r| r.stage == "minimal")
            .filter_map(|r| r.file.strip_prefix("ode/p")?.strip_suffix(".ode")?.parse().ok())
            .collect();
        ps.sort_unstable();
        ps.dedup();
        ps
    }
}

#[derive(Clone, Debug)]
pub struct Cache {
    dir: Option<PathBuf>,
    d: usize,
}

impl Cache {
    /// No persistence; every stage is computed.
    pub fn disabled(d: usize) -> Self {
        Cache { dir: None, d }
    }

    pub fn at(root: impl AsRef<Path>, d: usize) -> Self {
        Cache {
            dir: Some(root.as_ref().join(format!("d{d}"))),
            d,
        }
    }

    /// Uses `LGF_CACHE_DIR` when set.
    pub fn from_env(d: usize) -> Self {
        match std::env::var_os(CACHE_ENV) {
            Some(root) if !root.is_empty() => Self::at(root, d),
            _ => Self::disabled(d),
        }
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    fn manifest_path(&self) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join("manifest.jsonl"))
    }

    pub fn manifest(&self) -> Result<RunManifest> {
        let mut m = RunManifest {
            d: self.d,
            records: Vec::new(),
        };
        let Some(path) = self.manifest_path() else {
            return Ok(m);
        };
        if !path.exists() {
            return Ok(m);
        }
        for line in fs::read_to_string(path)?.lines().filter(|l| !l.trim().is_empty()) {
            let rec: StageRecord = serde_json::from_str(line).map_err(|e| Error::Parse(e.to_string()))?;
            m.records.push(rec);
        }
        Ok(m)
    }

    fn append(&self, rec: &StageRecord) -> Result<()> {
        let Some(path) = self.manifest_path() else {
            return Ok(());
        };
        let _guard = MANIFEST_LOCK.lock().unwrap_or_else(|e| e.into_inner());
        let mut f = OpenOptions::new().create(true).append(true).open(path)?;
        let line = serde_json::to_string(rec).map_err(|e| Error::Parse(e.to_string()))?;
        writeln!(f, "{line}")?;
        Ok(())
    }

    /// Cached artifact text if it is intact and was built from `inputs`.
    pub fn lookup(&self, file: &str, inputs: &[String]) -> Result<Option<String>> {
        let Some(dir) = &self.dir else {
            return Ok(None);
        };
        let path = dir.join(file);
        if !path.exists() {
            return Ok(None);
        }
        let text = fs::read_to_string(&path)?;
        let m = self.manifest()?;
        Ok(match m.latest(file) {
            Some(r) if r.sha256 == sha256_hex(text.as_bytes()) && r.inputs == inputs => Some(text),
            _ => None,
        })
    }

    /// Returns the cached artifact or computes, stores and records it.
    pub fn stage<F>(&self, stage: &str, file: &str, inputs: &[String], compute: F) -> Result<Artifact>
    where
        F: FnOnce() -> Result<String>,
    {
        if let Some(text) = self.lookup(file, inputs)? {
            return Ok(Artifact {
                sha256: sha256_hex(text.as_bytes()),
                text,
                cached: true,
            });
        }
        let text = compute()?;
        let sha = sha256_hex(text.as_bytes());
        if let Some(dir) = &self.dir {
            let path = dir.join(file);
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent)?;
            }
            let tmp = path.with_extension("tmp");
            fs::write(&tmp, &text)?;
            fs::rename(&tmp, &path)?;
            self.append(&StageRecord {
                stage: stage.into(),
                file: file.into(),
                sha256: sha.clone(),
                inputs: inputs.to_vec(),
            })?;
        }
        Ok(Artifact {
            text,
            sha256: sha,
            cached: false,
        })
    }
}

#[derive(Clone, Debug)]
pub struct Artifact {
    pub text: String,
    pub sha256: String,
    pub cached: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_known_value() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn stage_reuse_and_invalidation() {
        let root = std::env::temp_dir().join(format!("lgf-cache-test-{}", std::process::id()));
        let _ = fs::remove_dir_all(&root);
        let c = Cache::at(&root, 3);
        let mut calls = 0;
        let a = c
            .stage("series", "s.txt", &["x".into()], || {
                calls += 1;
                Ok("hello".into())
            })
            .unwrap();
        assert!(!a.cached);
        let b = c.stage("series", "s.txt", &["x".into()], || unreachable!()).unwrap();
        assert!(b.cached);
        assert_eq!(a.sha256, b.sha256);
        let changed = c
            .stage("series", "s.txt", &["y".into()], || {
                calls += 1;
                Ok("hello".into())
            })
            .unwrap();
        assert!(!changed.cached);
        fs::write(c.dir().unwrap().join("s.txt"), "tampered").unwrap();
        let redo = c
            .stage("series", "s.txt", &["y".into()], || {
                calls += 1;
                Ok("hello".into())
            })
            .unwrap();
        assert!(!redo.cached);
        assert_eq!(calls, 3);
        assert_eq!(c.manifest().unwrap().records.len(), 3);
        fs::remove_dir_all(&root).unwrap();
    }
}
