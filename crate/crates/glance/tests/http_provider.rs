//! HTTP provider contracts against the stub server: batching, ordering,
//! retry with backoff, and cache interplay.

mod common;

use common::{deterministic_vector, StubEmbedServer};
use glance::llm::{cache_key, CachedProvider, EmbeddingCache, EmbeddingProvider, HttpProvider};

#[test]
fn vectors_round_trip_in_order() {
    let server = StubEmbedServer::start(8, 0);
    let provider = HttpProvider::new(server.endpoint(), "stub", 8, 2, 5).unwrap();
    let prompts: Vec<String> = (0..4).map(|i| format!("prompt number {i}")).collect();
    let vectors = provider.embed_batch(&prompts).unwrap();
    assert_eq!(vectors.len(), 4);
    for (prompt, vector) in prompts.iter().zip(&vectors) {
        assert_eq!(vector, &deterministic_vector(prompt, 8));
    }
}

#[test]
fn batch_of_three_is_one_request() {
    let server = StubEmbedServer::start(8, 0);
    let provider = HttpProvider::new(server.endpoint(), "stub", 8, 2, 5).unwrap();
    let prompts: Vec<String> = (0..3).map(|i| format!("p{i}")).collect();
    provider.embed_batch(&prompts).unwrap();
    assert_eq!(
        server.request_count(),
        1,
        "three prompts batch into one request"
    );
    assert_eq!(provider.http_requests(), 1);
    assert_eq!(provider.calls(), 3);
}

#[test]
fn rate_limit_then_success_retries_once() {
    let server = StubEmbedServer::start(8, 1);
    let provider = HttpProvider::new(server.endpoint(), "stub", 8, 3, 5).unwrap();
    let vectors = provider.embed_batch(&["hello".to_string()]).unwrap();
    assert_eq!(vectors.len(), 1);
    assert_eq!(provider.retry_count(), 1, "one 429 costs exactly one retry");
    assert_eq!(server.request_count(), 2);
}

#[test]
fn retries_exhausted_is_provider_error() {
    let server = StubEmbedServer::start(8, 10);
    let provider = HttpProvider::new(server.endpoint(), "stub", 8, 2, 1).unwrap();
    let err = provider.embed_batch(&["hello".to_string()]).unwrap_err();
    assert!(matches!(err, glance::GlanceError::Provider(_)));
}

#[test]
fn dim_mismatch_is_fatal_config_error() {
    let server = StubEmbedServer::start(8, 0);
    // declared dim 16 but the server answers with 8
    let provider = HttpProvider::new(server.endpoint(), "stub", 16, 3, 1).unwrap();
    let err = provider.embed_batch(&["hello".to_string()]).unwrap_err();
    assert!(matches!(err, glance::GlanceError::Config(_)));
    assert_eq!(server.request_count(), 1, "config errors are not retried");
}

#[test]
fn cold_then_warm_cache_makes_zero_http_calls() {
    let server = StubEmbedServer::start(8, 0);
    let dir = tempfile::tempdir().unwrap();
    let cache_path = dir.path().join("cache.jsonl");
    let prompts: Vec<String> = (0..5).map(|i| format!("cached prompt {i}")).collect();

    let cold_vectors = {
        let http = HttpProvider::new(server.endpoint(), "stub", 8, 2, 5).unwrap();
        let provider =
            CachedProvider::new(Box::new(http), EmbeddingCache::open(&cache_path).unwrap());
        let vectors = provider.embed_batch(&prompts).unwrap();
        assert_eq!(provider.http_requests(), 1);
        vectors
    };
    let requests_after_cold = server.request_count();

    let http = HttpProvider::new(server.endpoint(), "stub", 8, 2, 5).unwrap();
    let provider = CachedProvider::new(Box::new(http), EmbeddingCache::open(&cache_path).unwrap());
    let warm_vectors = provider.embed_batch(&prompts).unwrap();
    assert_eq!(
        provider.http_requests(),
        0,
        "warm run makes zero HTTP calls"
    );
    assert_eq!(server.request_count(), requests_after_cold);
    assert_eq!(warm_vectors, cold_vectors);
    // content addressing: every prompt is present under its key
    let cache = EmbeddingCache::open(&cache_path).unwrap();
    for p in &prompts {
        assert!(cache.get(&cache_key(p)).is_some());
    }
}
