use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{AssistantConfig, Example, LlmError};
use crate::category::Category;

#[derive(Serialize)]
struct KeyMaterial<'a> {
    category: Category,
    knowledge_document: &'a str,
    examples: &'a [Example],
    model: &'a str,
    temperature: f64,
    prompt: &'a str,
    index: usize,
}

/// Hex SHA-256 over a canonical JSON encoding of the config, prompt and
/// sample index.
pub fn cache_key(config: &AssistantConfig, prompt: &str, index: usize) -> String {
    let material = KeyMaterial {
        category: config.category,
        knowledge_document: &config.knowledge_document,
        examples: &config.examples,
        model: &config.model,
        temperature: config.temperature,
        prompt,
        index,
    };
    let bytes = serde_json::to_vec(&material).expect("key material serializes");
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub key: String,
    pub category: Category,
    pub prompt: String,
    pub index: usize,
    pub response: String,
}

/// One `<key>.json` file per response. Reads are lock-free; writes go
/// through a temp file and rename under a mutex.
#[derive(Debug)]
pub struct ResponseCache {
    dir: PathBuf,
    write_lock: Mutex<()>,
}

impl ResponseCache {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, LlmError> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(ResponseCache {
            dir,
            write_lock: Mutex::new(()),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn get(&self, key: &str) -> Result<Option<CacheEntry>, LlmError> {
        let bytes = match std::fs::read(self.path(key)) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let entry: CacheEntry =
            serde_json::from_slice(&bytes).map_err(|e| LlmError::Io(format!("corrupt cache entry {key}: {e}")))?;
        Ok(Some(entry))
    }

    pub fn put(&self, entry: &CacheEntry) -> Result<(), LlmError> {
        let mut bytes = serde_json::to_vec_pretty(entry).expect("entry serializes");
        bytes.push(b'\n');
        let _guard = self.write_lock.lock().unwrap_or_else(|p| p.into_inner());
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        tmp.write_all(&bytes)?;
        tmp.persist(self.path(&entry.key)).map_err(|e| LlmError::Io(e.to_string()))?;
        Ok(())
    }

    /// Keys of every stored entry, sorted.
    pub fn keys(&self) -> Result<Vec<String>, LlmError> {
        let mut keys = Vec::new();
        for e in std::fs::read_dir(&self.dir)? {
            let name = e?.file_name().to_string_lossy().into_owned();
            if let Some(k) = name.strip_suffix(".json") {
                keys.push(k.to_string());
            }
        }
        keys.sort();
        Ok(keys)
    }
}
