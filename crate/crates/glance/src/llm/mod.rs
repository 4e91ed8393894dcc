//! The frozen text expert: prompt serialization, embedding providers
//! (mock, cache-only, HTTP with cache), and the concatenated multi-hop
//! node embedding.

pub mod cache;
pub mod http;
pub mod mock;
pub mod prompt;
pub mod provider;

pub use cache::{cache_key, CacheOnlyProvider, CachedProvider, EmbeddingCache};
pub use http::{HttpProvider, API_KEY_ENV};
pub use mock::{mock_embed, MockProvider};
pub use prompt::{
    serialize_prompts, PromptBundle, EGO_MAX_CHARS, HOP1_CAP, HOP_MAX_CHARS, PER_NODE_CHAR_BUDGET,
    PROMPT_TEMPLATE_VERSION, TERMINATOR,
};
pub use provider::{embed_node, l2_normalize, EmbeddingProvider, LlmEmbedding};

use crate::error::Result;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

/// Provider selection for configs. Swapping kinds changes no downstream
/// type or shape, only values.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProviderConfig {
    Mock {
        dim: usize,
        seed: u64,
        /// Class token pools the histogram coordinates key on; empty means
        /// pure hash noise.
        #[serde(default)]
        class_vocab: Vec<Vec<String>>,
    },
    FileCache {
        dim: usize,
        cache_path: PathBuf,
    },
    Http {
        endpoint: String,
        model: String,
        dim: usize,
        #[serde(default)]
        cache_path: Option<PathBuf>,
        #[serde(default = "default_retries")]
        max_retries: u32,
        #[serde(default = "default_backoff_ms")]
        backoff_ms: u64,
    },
}

fn default_retries() -> u32 {
    3
}

fn default_backoff_ms() -> u64 {
    200
}

impl Default for ProviderConfig {
    fn default() -> Self {
        ProviderConfig::Mock {
            dim: 32,
            seed: 0,
            class_vocab: Vec::new(),
        }
    }
}

impl ProviderConfig {
    pub fn dim(&self) -> usize {
        match self {
            ProviderConfig::Mock { dim, .. }
            | ProviderConfig::FileCache { dim, .. }
            | ProviderConfig::Http { dim, .. } => *dim,
        }
    }

    pub fn build(&self) -> Result<Box<dyn EmbeddingProvider>> {
        match self {
            ProviderConfig::Mock {
                dim,
                seed,
                class_vocab,
            } => Ok(Box::new(MockProvider::new(
                *dim,
                *seed,
                class_vocab.clone(),
            )?)),
            ProviderConfig::FileCache { dim, cache_path } => Ok(Box::new(CacheOnlyProvider::new(
                *dim,
                EmbeddingCache::open(cache_path)?,
            ))),
            ProviderConfig::Http {
                endpoint,
                model,
                dim,
                cache_path,
                max_retries,
                backoff_ms,
            } => {
                let http = HttpProvider::new(endpoint, model, *dim, *max_retries, *backoff_ms)?;
                match cache_path {
                    Some(path) => Ok(Box::new(CachedProvider::new(
                        Box::new(http),
                        EmbeddingCache::open(path)?,
                    ))),
                    None => Ok(Box::new(http)),
                }
            }
        }
    }
}
