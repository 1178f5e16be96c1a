//! On-disk cache of built AutoCoT demonstration sets.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::DemoExemplar;
use crate::{CoreError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemoCacheKey {
    pub dataset_hash: String,
    pub k: usize,
    pub seed: u64,
    pub model: String,
}

impl DemoCacheKey {
    fn file_stem(&self) -> String {
        let json = serde_json::to_string(self).expect("key serializes");
        let digest = Sha256::digest(json.as_bytes());
        let hex: String = digest.iter().take(8).map(|b| format!("{b:02x}")).collect();
        format!("autocot-{hex}")
    }
}

#[derive(Serialize, Deserialize)]
struct CacheFile {
    key: DemoCacheKey,
    exemplars: Vec<DemoExemplar>,
}

#[derive(Debug, Clone)]
pub struct DemoCache {
    dir: PathBuf,
}

impl DemoCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        DemoCache { dir: dir.into() }
    }

    pub fn path_for(&self, key: &DemoCacheKey) -> PathBuf {
        self.dir.join(format!("{}.json", key.file_stem()))
    }

    /// `None` when absent or stored under a different key.
    pub fn load(&self, key: &DemoCacheKey) -> Result<Option<Vec<DemoExemplar>>> {
        let path = self.path_for(key);
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(CoreError::io(&path, e)),
        };
        let file: CacheFile = serde_json::from_str(&text)
            .map_err(|e| CoreError::InvalidInput(format!("{}: {e}", path.display())))?;
        Ok((file.key == *key).then_some(file.exemplars))
    }

    pub fn store(&self, key: &DemoCacheKey, exemplars: &[DemoExemplar]) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.dir).map_err(|e| CoreError::io(&self.dir, e))?;
        let path = self.path_for(key);
        let file = CacheFile {
            key: key.clone(),
            exemplars: exemplars.to_vec(),
        };
        let json = serde_json::to_string_pretty(&file).expect("cache serializes");
        std::fs::write(&path, json).map_err(|e| CoreError::io(&path, e))?;
        Ok(path)
    }

    pub fn get_or_build(
        &self,
        key: &DemoCacheKey,
        build: impl FnOnce() -> Result<Vec<DemoExemplar>>,
    ) -> Result<Vec<DemoExemplar>> {
        if let Some(hit) = self.load(key)? {
            return Ok(hit);
        }
        let built = build()?;
        self.store(key, &built)?;
        Ok(built)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }
}
