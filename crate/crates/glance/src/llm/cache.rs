//! Content-addressed embedding cache: JSON Lines of
//! `{"k": hex-sha256, "d": dim, "v": [floats]}` keyed by the versioned
//! prompt text. Reads are concurrent, appends serialized; puts are
//! idempotent; corrupt records are skipped with a warning naming the line.

use crate::error::{GlanceError, Result};
use crate::llm::prompt::PROMPT_TEMPLATE_VERSION;
use crate::llm::provider::EmbeddingProvider;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

/// Cache key: sha256 of the template-versioned prompt, hex-encoded.
pub fn cache_key(prompt: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(PROMPT_TEMPLATE_VERSION.as_bytes());
    hasher.update(b"|");
    hasher.update(prompt.as_bytes());
    hex_encode(&hasher.finalize())
}

fn hex_encode(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

#[derive(Serialize, Deserialize)]
struct CacheRecord {
    k: String,
    d: usize,
    v: Vec<f64>,
}

pub struct EmbeddingCache {
    path: PathBuf,
    state: Mutex<HashMap<String, Vec<f64>>>,
}

impl EmbeddingCache {
    /// Open (or create) a cache file, loading every valid record.
    pub fn open(path: &Path) -> Result<Self> {
        let mut map = HashMap::new();
        if path.exists() {
            let reader = BufReader::new(std::fs::File::open(path)?);
            for (i, line) in reader.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                match serde_json::from_str::<CacheRecord>(&line) {
                    Ok(rec) if rec.v.len() == rec.d => {
                        map.insert(rec.k, rec.v);
                    }
                    _ => {
                        log::warn!(
                            "skipping corrupt cache record at {}:{}",
                            path.display(),
                            i + 1
                        );
                    }
                }
            }
        } else if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)?;
            }
        }
        Ok(Self {
            path: path.to_path_buf(),
            state: Mutex::new(map),
        })
    }

    pub fn len(&self) -> usize {
        self.state.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, key: &str) -> Option<Vec<f64>> {
        self.state.lock().unwrap().get(key).cloned()
    }

    /// Insert and append to the file; a second put of the same key is a
    /// no-op.
    pub fn put(&self, key: &str, vector: &[f64]) -> Result<()> {
        let mut state = self.state.lock().unwrap();
        if state.contains_key(key) {
            return Ok(());
        }
        let record = CacheRecord {
            k: key.to_string(),
            d: vector.len(),
            v: vector.to_vec(),
        };
        let mut file = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)?;
        let mut line = serde_json::to_string(&record)?;
        line.push('\n');
        file.write_all(line.as_bytes())?;
        state.insert(key.to_string(), vector.to_vec());
        Ok(())
    }
}

/// Caching wrapper: hits are served locally, misses go to the inner
/// provider as one batch and are persisted.
pub struct CachedProvider {
    inner: Box<dyn EmbeddingProvider>,
    cache: EmbeddingCache,
}

impl CachedProvider {
    pub fn new(inner: Box<dyn EmbeddingProvider>, cache: EmbeddingCache) -> Self {
        Self { inner, cache }
    }

    pub fn cache(&self) -> &EmbeddingCache {
        &self.cache
    }
}

impl EmbeddingProvider for CachedProvider {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn embed_batch(&self, prompts: &[String]) -> Result<Vec<Vec<f64>>> {
        let keys: Vec<String> = prompts.iter().map(|p| cache_key(p)).collect();
        let mut out: Vec<Option<Vec<f64>>> = keys.iter().map(|k| self.cache.get(k)).collect();
        let miss_idx: Vec<usize> = out
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_none())
            .map(|(i, _)| i)
            .collect();
        if !miss_idx.is_empty() {
            let miss_prompts: Vec<String> = miss_idx.iter().map(|&i| prompts[i].clone()).collect();
            let vectors = self.inner.embed_batch(&miss_prompts)?;
            if vectors.len() != miss_prompts.len() {
                return Err(GlanceError::Provider(format!(
                    "provider returned {} vectors for {} prompts",
                    vectors.len(),
                    miss_prompts.len()
                )));
            }
            for (&i, v) in miss_idx.iter().zip(vectors) {
                self.cache.put(&keys[i], &v)?;
                out[i] = Some(v);
            }
        }
        Ok(out.into_iter().map(|v| v.unwrap()).collect())
    }

    fn calls(&self) -> u64 {
        self.inner.calls()
    }

    fn http_requests(&self) -> u64 {
        self.inner.http_requests()
    }
}

/// Cache-only provider for running offline against a precomputed cache;
/// any miss is a provider error telling the user to run `embed` first.
pub struct CacheOnlyProvider {
    dim: usize,
    cache: EmbeddingCache,
    calls: std::sync::atomic::AtomicU64,
}

impl CacheOnlyProvider {
    pub fn new(dim: usize, cache: EmbeddingCache) -> Self {
        Self {
            dim,
            cache,
            calls: std::sync::atomic::AtomicU64::new(0),
        }
    }
}

impl EmbeddingProvider for CacheOnlyProvider {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed_batch(&self, prompts: &[String]) -> Result<Vec<Vec<f64>>> {
        prompts
            .iter()
            .map(|p| {
                self.cache.get(&cache_key(p)).ok_or_else(|| {
                    GlanceError::Provider(format!(
                        "prompt {} not in cache; run the embed command first",
                        &cache_key(p)[..12]
                    ))
                })
            })
            .collect()
    }

    fn calls(&self) -> u64 {
        self.calls.load(std::sync::atomic::Ordering::Relaxed)
    }
}
