use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::spec::{SweepTolerances, Variable};
use super::{ResultRow, VERSION};
use crate::error::Result;

/// Environment variable naming the cache directory.
pub const CACHE_ENV: &str = "HARVEST_CACHE_DIR";

/// On-disk store of evaluated points, one JSON file per point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cache {
    dir: PathBuf,
}

#[derive(Serialize)]
struct KeyMaterial<'a> {
    version: &'a str,
    point: &'a BTreeMap<Variable, f64>,
    tolerances: &'a SweepTolerances,
}

impl Cache {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Cache { dir })
    }

    /// `$HARVEST_CACHE_DIR`, else `$XDG_CACHE_HOME/harvest`, else `~/.cache/harvest`.
    pub fn default_dir() -> Option<PathBuf> {
        if let Some(dir) = std::env::var_os(CACHE_ENV) {
            return Some(PathBuf::from(dir));
        }
        if let Some(dir) = std::env::var_os("XDG_CACHE_HOME") {
            return Some(PathBuf::from(dir).join("harvest"));
        }
        std::env::var_os("HOME").map(|home| PathBuf::from(home).join(".cache").join("harvest"))
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Hash of the resolved inputs, tolerances and software version.
    pub fn key(point: &BTreeMap<Variable, f64>, tolerances: &SweepTolerances) -> String {
        let material = KeyMaterial {
            version: VERSION,
            point,
            tolerances,
        };
        let bytes = serde_json::to_vec(&material).expect("key material serializes");
        hex::encode(Sha256::digest(bytes))
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    /// Stored row for `key`; unreadable entries are removed.
    pub fn lookup(&self, key: &str) -> Option<ResultRow> {
        let path = self.path(key);
        let text = fs::read_to_string(&path).ok()?;
        match serde_json::from_str(&text) {
            Ok(row) => Some(row),
            Err(e) => {
                log::warn!("dropping corrupt cache entry {}: {e}", path.display());
                let _ = fs::remove_file(&path);
                None
            }
        }
    }

    /// Atomically store a row: write a temporary file, then rename it.
    pub fn store(&self, key: &str, row: &ResultRow) -> Result<()> {
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        serde_json::to_writer(&mut tmp, row).map_err(std::io::Error::from)?;
        tmp.flush()?;
        tmp.persist(self.path(key)).map_err(|e| e.error)?;
        Ok(())
    }
}
