//! OpenAI-compatible HTTP embedding provider.
//!
//! POST `{endpoint}/embeddings` with `{"model": ..., "input": [...]}`;
//! the response carries `{"data": [{"index": i, "embedding": [...]}]}`.
//! Requests are batched, retried with exponential backoff, and matched back
//! to inputs by index. Auth comes from the `GLANCE_API_KEY` env var.

use crate::error::{GlanceError, Result};
use crate::llm::provider::EmbeddingProvider;
use serde::{Deserialize, Serialize};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Duration;

pub const API_KEY_ENV: &str = "GLANCE_API_KEY";

#[derive(Debug, Serialize)]
struct EmbeddingRequest<'a> {
    model: &'a str,
    input: &'a [String],
}

#[derive(Debug, Deserialize)]
struct EmbeddingResponse {
    data: Vec<EmbeddingItem>,
}

#[derive(Debug, Deserialize)]
struct EmbeddingItem {
    index: usize,
    embedding: Vec<f64>,
}

pub struct HttpProvider {
    endpoint: String,
    model: String,
    dim: usize,
    client: reqwest::blocking::Client,
    api_key: Option<String>,
    max_retries: u32,
    backoff_ms: u64,
    calls: AtomicU64,
    requests: AtomicU64,
    retries: AtomicU64,
}

impl HttpProvider {
    pub fn new(
        endpoint: impl Into<String>,
        model: impl Into<String>,
        dim: usize,
        max_retries: u32,
        backoff_ms: u64,
    ) -> Result<Self> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(120))
            .build()
            .map_err(|e| GlanceError::Provider(format!("http client: {e}")))?;
        Ok(Self {
            endpoint: endpoint.into().trim_end_matches('/').to_string(),
            model: model.into(),
            dim,
            client,
            api_key: std::env::var(API_KEY_ENV).ok(),
            max_retries,
            backoff_ms,
            calls: AtomicU64::new(0),
            requests: AtomicU64::new(0),
            retries: AtomicU64::new(0),
        })
    }

    /// Retries performed so far (for observability and tests).
    pub fn retry_count(&self) -> u64 {
        self.retries.load(Ordering::Relaxed)
    }

    fn post_once(&self, prompts: &[String]) -> Result<Vec<Vec<f64>>> {
        self.requests.fetch_add(1, Ordering::Relaxed);
        let url = format!("{}/embeddings", self.endpoint);
        let body = EmbeddingRequest {
            model: &self.model,
            input: prompts,
        };
        let mut req = self.client.post(&url).json(&body);
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req
            .send()
            .map_err(|e| GlanceError::Provider(format!("request to {url}: {e}")))?;
        let status = resp.status();
        if !status.is_success() {
            return Err(GlanceError::Provider(format!("{url} returned {status}")));
        }
        let parsed: EmbeddingResponse = resp
            .json()
            .map_err(|e| GlanceError::Provider(format!("bad response body: {e}")))?;
        if parsed.data.len() != prompts.len() {
            return Err(GlanceError::Provider(format!(
                "response carries {} embeddings for {} inputs",
                parsed.data.len(),
                prompts.len()
            )));
        }
        let mut out: Vec<Option<Vec<f64>>> = vec![None; prompts.len()];
        for item in parsed.data {
            if item.index >= prompts.len() {
                return Err(GlanceError::Provider(format!(
                    "response index {} out of range",
                    item.index
                )));
            }
            if item.embedding.len() != self.dim {
                return Err(GlanceError::Config(format!(
                    "provider returned dim {} where {} was declared",
                    item.embedding.len(),
                    self.dim
                )));
            }
            out[item.index] = Some(item.embedding);
        }
        out.into_iter()
            .enumerate()
            .map(|(i, v)| {
                v.ok_or_else(|| GlanceError::Provider(format!("no embedding for index {i}")))
            })
            .collect()
    }
}

impl EmbeddingProvider for HttpProvider {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed_batch(&self, prompts: &[String]) -> Result<Vec<Vec<f64>>> {
        if prompts.is_empty() {
            return Ok(Vec::new());
        }
        let mut attempt = 0u32;
        loop {
            match self.post_once(prompts) {
                Ok(vectors) => {
                    self.calls
                        .fetch_add(prompts.len() as u64, Ordering::Relaxed);
                    return Ok(vectors);
                }
                // dim mismatch is a config error, not worth retrying
                Err(e @ GlanceError::Config(_)) => return Err(e),
                Err(e) => {
                    if attempt >= self.max_retries {
                        return Err(e);
                    }
                    let wait = self.backoff_ms.saturating_mul(1 << attempt.min(16));
                    std::thread::sleep(Duration::from_millis(wait));
                    attempt += 1;
                    self.retries.fetch_add(1, Ordering::Relaxed);
                }
            }
        }
    }

    fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    fn http_requests(&self) -> u64 {
        self.requests.load(Ordering::Relaxed)
    }
}
