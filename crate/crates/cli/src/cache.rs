//! On-disk JSON cache with a schema version and a sha256 checksum per entry.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const CACHE_SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CacheError {
    #[error("corrupt cache entry {0}")]
    CorruptCache(String),
    #[error("cache entry {key} has schema {found}, expected {expected}")]
    VersionMismatch { key: String, found: u32, expected: u32 },
    #[error("cache io error: {0}")]
    Io(String),
}

#[derive(Serialize, Deserialize)]
struct Envelope {
    schema_version: u32,
    key: String,
    checksum: String,
    payload: String,
}

/// A cache rooted at a directory, or a no-op cache.
#[derive(Clone, Debug, Default)]
pub struct Cache {
    dir: Option<PathBuf>,
}

fn checksum(payload: &str) -> String {
    hex::encode(Sha256::digest(payload.as_bytes()))
}

impl Cache {
    pub fn new(dir: Option<&Path>) -> Result<Self, CacheError> {
        if let Some(d) = dir {
            fs::create_dir_all(d).map_err(|e| CacheError::Io(e.to_string()))?;
        }
        Ok(Self { dir: dir.map(Path::to_path_buf) })
    }

    pub fn disabled() -> Self {
        Self { dir: None }
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        let name: String =
            key.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect();
        self.dir.as_ref().map(|d| d.join(format!("{name}.json")))
    }

    pub fn load<T: DeserializeOwned>(&self, key: &str) -> Result<Option<T>, CacheError> {
        let Some(path) = self.path(key) else { return Ok(None) };
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(CacheError::Io(e.to_string())),
        };
        let env: Envelope = serde_json::from_str(&text).map_err(|_| CacheError::CorruptCache(key.into()))?;
        if env.schema_version != CACHE_SCHEMA {
            return Err(CacheError::VersionMismatch { key: key.into(), found: env.schema_version, expected: CACHE_SCHEMA });
        }
        if env.key != key || env.checksum != checksum(&env.payload) {
            return Err(CacheError::CorruptCache(key.into()));
        }
        serde_json::from_str(&env.payload).map(Some).map_err(|_| CacheError::CorruptCache(key.into()))
    }

    pub fn store<T: Serialize>(&self, key: &str, value: &T) -> Result<(), CacheError> {
        let Some(path) = self.path(key) else { return Ok(()) };
        let payload = serde_json::to_string(value).map_err(|e| CacheError::Io(e.to_string()))?;
        let env = Envelope { schema_version: CACHE_SCHEMA, key: key.into(), checksum: checksum(&payload), payload };
        let text = serde_json::to_string(&env).map_err(|e| CacheError::Io(e.to_string()))?;
        // write then rename so concurrent readers never see half a file
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        fs::write(&tmp, text).map_err(|e| CacheError::Io(e.to_string()))?;
        fs::rename(&tmp, &path).map_err(|e| CacheError::Io(e.to_string()))
    }

    /// Loads `key`, or computes and stores it.
    pub fn get_or_compute<T, E>(&self, key: &str, f: impl FnOnce() -> Result<T, E>) -> Result<T, E>
    where
        T: Serialize + DeserializeOwned,
        E: From<CacheError>,
    {
        if let Some(v) = self.load(key)? {
            return Ok(v);
        }
        let v = f()?;
        self.store(key, &v)?;
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_tamper() {
        let dir = tempfile::tempdir().unwrap();
        let c = Cache::new(Some(dir.path())).unwrap();
        let m = vec![vec![1i64, 2], vec![3, 0]];
        assert_eq!(c.load::<Vec<Vec<i64>>>("brandt-2").unwrap(), None);
        c.store("brandt-2", &m).unwrap();
        assert_eq!(c.load::<Vec<Vec<i64>>>("brandt-2").unwrap(), Some(m));
        let path = dir.path().join("brandt-2.json");
        let text = std::fs::read_to_string(&path).unwrap().replace("[3,0]", "[3,1]");
        std::fs::write(&path, text).unwrap();
        assert_eq!(c.load::<Vec<Vec<i64>>>("brandt-2"), Err(CacheError::CorruptCache("brandt-2".into())));
        let text = std::fs::read_to_string(&path).unwrap().replace("\"schema_version\":1", "\"schema_version\":9");
        std::fs::write(&path, text).unwrap();
        assert!(matches!(c.load::<Vec<Vec<i64>>>("brandt-2"), Err(CacheError::VersionMismatch { found: 9, .. })));
    }
}
