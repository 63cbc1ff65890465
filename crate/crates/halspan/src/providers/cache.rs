//! Content-addressed transcript store.
//!
//! Layout: `<root>/<first two hex digits>/<fingerprint>.json`, one pretty
//! printed [`CacheRecord`] per file so fixtures diff cleanly.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::ProviderError;

pub const SCHEMA: &str = "halspan.cache.v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CachedRequest {
    Chat {
        model_ref: String,
        system_prompt: String,
        user_prompt: String,
        temperature: f64,
        max_tokens: u32,
    },
    Translation {
        text: String,
        source_lang: String,
        target_lang: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CachedResponse {
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheRecord {
    pub schema: String,
    pub fingerprint: String,
    pub request: CachedRequest,
    pub response: CachedResponse,
    /// Seconds since the Unix epoch at recording time.
    pub timestamp: u64,
}

/// Writes are serialized through a lock and land atomically via rename;
/// reads take no lock.
#[derive(Debug)]
pub struct CacheStore {
    root: PathBuf,
    write_lock: Mutex<()>,
    tmp_counter: AtomicU64,
}

impl CacheStore {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, ProviderError> {
        let root = root.into();
        fs::create_dir_all(&root)
            .map_err(|e| ProviderError::Cache(format!("{}: {e}", root.display())))?;
        Ok(Self::at(root))
    }

    /// Store rooted at an existing directory; nothing is created.
    pub fn at(root: impl Into<PathBuf>) -> Self {
        CacheStore {
            root: root.into(),
            write_lock: Mutex::new(()),
            tmp_counter: AtomicU64::new(0),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path_for(&self, fingerprint: &str) -> PathBuf {
        let shard = fingerprint.get(..2).unwrap_or("__");
        self.root.join(shard).join(format!("{fingerprint}.json"))
    }

    pub fn get(&self, fingerprint: &str) -> Result<Option<CacheRecord>, ProviderError> {
        let path = self.path_for(fingerprint);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(ProviderError::Cache(format!("{}: {e}", path.display()))),
        };
        let record: CacheRecord = serde_json::from_slice(&bytes)
            .map_err(|e| ProviderError::Cache(format!("{}: {e}", path.display())))?;
        if record.schema != SCHEMA || record.fingerprint != fingerprint {
            return Err(ProviderError::Cache(format!(
                "{}: record does not match schema {SCHEMA} / fingerprint {fingerprint}",
                path.display()
            )));
        }
        Ok(Some(record))
    }

    pub fn put(
        &self,
        fingerprint: &str,
        request: CachedRequest,
        text: &str,
    ) -> Result<(), ProviderError> {
        let record = CacheRecord {
            schema: SCHEMA.to_string(),
            fingerprint: fingerprint.to_string(),
            request,
            response: CachedResponse {
                text: text.to_string(),
            },
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        };
        let mut body = serde_json::to_vec_pretty(&record)
            .map_err(|e| ProviderError::Cache(e.to_string()))?;
        body.push(b'\n');

        let path = self.path_for(fingerprint);
        let cache_err = |e: std::io::Error| ProviderError::Cache(format!("{}: {e}", path.display()));
        let _guard = self.write_lock.lock().unwrap_or_else(|p| p.into_inner());
        let dir = path.parent().expect("sharded path has a parent");
        fs::create_dir_all(dir).map_err(cache_err)?;
        let tmp = dir.join(format!(
            ".{fingerprint}.{}.{}.tmp",
            std::process::id(),
            self.tmp_counter.fetch_add(1, Ordering::Relaxed)
        ));
        fs::write(&tmp, &body).map_err(cache_err)?;
        fs::rename(&tmp, &path).map_err(cache_err)
    }

    /// Number of records in the store.
    pub fn len(&self) -> usize {
        let Ok(shards) = fs::read_dir(&self.root) else {
            return 0;
        };
        shards
            .flatten()
            .filter_map(|s| fs::read_dir(s.path()).ok())
            .flat_map(|files| files.flatten())
            .filter(|f| f.path().extension().is_some_and(|e| e == "json"))
            .count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chat_req() -> CachedRequest {
        CachedRequest::Chat {
            model_ref: "m".into(),
            system_prompt: "s".into(),
            user_prompt: "u".into(),
            temperature: 0.0,
            max_tokens: 8,
        }
    }

    #[test]
    fn put_then_get() {
        let dir = tempfile::tempdir().unwrap();
        let store = CacheStore::open(dir.path()).unwrap();
        assert!(store.get("abcdef").unwrap().is_none());
        store.put("abcdef", chat_req(), "So the hallucinations are: \"x\"").unwrap();
        let rec = store.get("abcdef").unwrap().unwrap();
        assert_eq!(rec.response.text, "So the hallucinations are: \"x\"");
        assert_eq!(rec.request, chat_req());
        assert!(store.path_for("abcdef").starts_with(dir.path().join("ab")));
        assert_eq!(store.len(), 1);
    }

    #[test]
    fn mismatched_record_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let store = CacheStore::open(dir.path()).unwrap();
        store.put("abcdef", chat_req(), "t").unwrap();
        fs::copy(store.path_for("abcdef"), store.path_for("ab0000")).unwrap();
        assert!(matches!(store.get("ab0000"), Err(ProviderError::Cache(_))));
    }

    #[test]
    fn concurrent_writers() {
        let dir = tempfile::tempdir().unwrap();
        let store = CacheStore::open(dir.path()).unwrap();
        std::thread::scope(|s| {
            for t in 0..8 {
                let store = &store;
                s.spawn(move || {
                    for i in 0..20 {
                        let fp = format!("{:02x}{t}{i}", i % 4);
                        store.put(&fp, chat_req(), &fp).unwrap();
                        assert_eq!(store.get(&fp).unwrap().unwrap().response.text, fp);
                    }
                });
            }
        });
        assert_eq!(store.len(), 160);
    }
}
