use std::net::SocketAddr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::extract::State;
use axum::http::StatusCode;
use axum::routing::post;
use axum::{Json, Router};
use serde_json::{json, Value};

use super::*;
use crate::category::ALL_CATEGORIES;

#[derive(Clone)]
struct Stub {
    hits: Arc<AtomicUsize>,
    bodies: Arc<Mutex<Vec<Value>>>,
    /// Status for hit number i; 200 returns `text`.
    statuses: Arc<Vec<u16>>,
    text: Arc<String>,
}

async fn completions(State(stub): State<Stub>, Json(body): Json<Value>) -> (StatusCode, Json<Value>) {
    let i = stub.hits.fetch_add(1, Ordering::SeqCst);
    stub.bodies.lock().unwrap().push(body);
    let status = stub.statuses.get(i).copied().unwrap_or(200);
    if status != 200 {
        return (StatusCode::from_u16(status).unwrap(), Json(json!({"error": "stub"})));
    }
    (
        StatusCode::OK,
        Json(json!({"choices": [{"message": {"role": "assistant", "content": *stub.text}}]})),
    )
}

/// Serves the stub on a background runtime; returns its base URL.
fn serve(stub: Stub) -> String {
    let (tx, rx) = std::sync::mpsc::channel::<SocketAddr>();
    std::thread::spawn(move || {
        let rt = tokio::runtime::Builder::new_multi_thread()
            .worker_threads(2)
            .enable_all()
            .build()
            .unwrap();
        rt.block_on(async move {
            let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
            tx.send(listener.local_addr().unwrap()).unwrap();
            let app = Router::new().route("/v1/chat/completions", post(completions)).with_state(stub);
            axum::serve(listener, app).await.unwrap();
        });
    });
    let addr = rx.recv().unwrap();
    format!("http://{addr}/v1")
}

fn stub(statuses: Vec<u16>, text: &str) -> Stub {
    Stub {
        hits: Arc::new(AtomicUsize::new(0)),
        bodies: Arc::new(Mutex::new(Vec::new())),
        statuses: Arc::new(statuses),
        text: Arc::new(text.to_string()),
    }
}

fn fast_retry() -> RetryPolicy {
    RetryPolicy {
        max_attempts: 5,
        base_delay: Duration::from_millis(1),
        max_delay: Duration::from_millis(4),
    }
}

fn config() -> AssistantConfig {
    AssistantConfig::for_category(Category::Patchscript, "stub-model")
}

#[test]
fn prompt_templates() {
    assert_eq!(
        build_prompt("maxpat-json", "additive", false).unwrap(),
        "Based on the examples given, use JSON for a Max patch to write code that implements additive synthesis."
    );
    assert_eq!(
        build_prompt("patchscript", "church bell", true).unwrap(),
        "Based on the examples given, use PatchScript to write code that implements a church bell. \
         Use for loops and/or random() in your code."
    );
    assert_eq!(
        build_prompt("webaudio-rich", "fm", true).unwrap(),
        "Write Web Audio code that implements FM synthesis. Use for loops and/or Math.random() in your code."
    );
    assert_eq!(
        build_prompt("json-wavir", "lfo", false).unwrap(),
        "Write JSON that implements an LFO."
    );
    assert_eq!(
        build_prompt("maxpat-json", "nonexistent", false).unwrap_err().code(),
        "unknown-benchmark"
    );
    assert_eq!(build_prompt("cobol", "am", false).unwrap_err().code(), "unknown-category");
}

#[test]
fn every_category_has_knowledge_and_an_example() {
    for c in ALL_CATEGORIES {
        let cfg = AssistantConfig::for_category(c, DEFAULT_MODEL);
        assert!(!cfg.knowledge_document.trim().is_empty(), "{c}");
        assert_eq!(cfg.examples.len(), 1);
        assert!(!cfg.examples[0].code.trim().is_empty());
        assert_eq!(cfg.temperature, 1.0);
        let req = cfg.request("p");
        assert_eq!(req.messages.len(), 2);
        assert!(req.messages[0].content.contains(cfg.examples[0].code.trim_end()));
    }
}

#[test]
fn json_examples_parse() {
    let m = AssistantConfig::for_category(Category::JsonMaxpat, "m");
    assert_eq!(
        crate::codec::parse_maxpat(m.examples[0].code.as_bytes()).unwrap().node_count(),
        6
    );
    let w = AssistantConfig::for_category(Category::JsonWavir, "m");
    assert!(crate::codec::parse_wavir(w.examples[0].code.as_bytes()).is_ok());
    let s = AssistantConfig::for_category(Category::PatchscriptRich, "m");
    assert!(crate::script::run_source(&s.examples[0].code, 1).is_ok());
}

#[test]
fn cache_key_depends_on_every_input() {
    let c = config();
    let k = cache_key(&c, "p", 0);
    assert_eq!(k.len(), 64);
    assert_eq!(k, cache_key(&c.clone(), "p", 0));
    assert_ne!(k, cache_key(&c, "p", 1));
    assert_ne!(k, cache_key(&c, "q", 0));
    let mut t = c.clone();
    t.temperature = 0.5;
    assert_ne!(k, cache_key(&t, "p", 0));
    let mut m = c.clone();
    m.model = "other".into();
    assert_ne!(k, cache_key(&m, "p", 0));
    let mut d = c;
    d.knowledge_document.push('x');
    assert_ne!(k, cache_key(&d, "p", 0));
}

#[test]
fn provenance_strings() {
    let p = Provenance::Live { model: "m".into() };
    assert_eq!(serde_json::to_string(&p).unwrap(), "\"live:m\"");
    let r: Provenance = serde_json::from_str("\"replay:abc\"").unwrap();
    assert_eq!(r, Provenance::Replay { key: "abc".into() });
    assert!("bogus".parse::<Provenance>().is_err());
}

#[test]
fn backoff_doubles_and_caps() {
    let p = RetryPolicy {
        max_attempts: 5,
        base_delay: Duration::from_millis(100),
        max_delay: Duration::from_millis(350),
    };
    assert_eq!(p.delay(1), Duration::from_millis(100));
    assert_eq!(p.delay(2), Duration::from_millis(200));
    assert_eq!(p.delay(3), Duration::from_millis(350));
}

#[test]
fn live_stub_returns_n_copies_with_fresh_contexts() {
    let s = stub(vec![], "```\nemit()\n```");
    let url = serve(s.clone());
    let backend = Arc::new(HttpBackend::new(url, Some("k".into())).unwrap().with_retry(fast_retry()));
    let dir = tempfile::tempdir().unwrap();
    let gen = Generator::live(backend, ResponseCache::open(dir.path()).unwrap(), DEFAULT_WORKERS);
    let cfg = config();
    let out = gen.generate(&cfg, "prompt", 6).unwrap();
    assert_eq!(out.len(), 6);
    for g in &out {
        assert_eq!(g.text, "```\nemit()\n```");
        assert_eq!(g.provenance, Provenance::Live { model: "stub-model".into() });
    }
    assert_eq!(s.hits.load(Ordering::SeqCst), 6);

    // Every request is exactly system + user, and never carries a response.
    let log = gen.request_log();
    assert_eq!(log.len(), 6);
    for req in &log {
        assert_eq!(req, &cfg.request("prompt"));
        assert!(req.messages.iter().all(|m| m.role != "assistant"));
        assert!(req.messages.iter().all(|m| !m.content.contains("emit()\n```")
            || m.role == "system"));
    }
    for body in s.bodies.lock().unwrap().iter() {
        assert_eq!(body["messages"].as_array().unwrap().len(), 2);
        assert_eq!(body["temperature"], 1.0);
    }

    // A second pass is served entirely from the cache.
    let again = gen.generate(&cfg, "prompt", 6).unwrap();
    assert_eq!(s.hits.load(Ordering::SeqCst), 6);
    assert!(again.iter().all(|g| matches!(g.provenance, Provenance::Replay { .. })));
    assert_eq!(gen.cache().keys().unwrap().len(), 6);
}

#[test]
fn retries_then_succeeds() {
    let s = stub(vec![500, 429, 503], "ok");
    let url = serve(s.clone());
    let backend = HttpBackend::new(url, None).unwrap().with_retry(fast_retry());
    assert_eq!(backend.complete(&config().request("p")).unwrap(), "ok");
    assert_eq!(s.hits.load(Ordering::SeqCst), 4);
}

#[test]
fn five_server_errors_is_http_error() {
    let s = stub(vec![500; 5], "never");
    let url = serve(s.clone());
    let backend = HttpBackend::new(url, None).unwrap().with_retry(fast_retry());
    let err = backend.complete(&config().request("p")).unwrap_err();
    assert_eq!(err, LlmError::Http { status: 500 });
    assert_eq!(err.code(), "http-error");
    assert_eq!(s.hits.load(Ordering::SeqCst), 5);
}

#[test]
fn persistent_429_is_rate_limited() {
    let s = stub(vec![429; 5], "never");
    let url = serve(s.clone());
    let backend = HttpBackend::new(url, None).unwrap().with_retry(fast_retry());
    assert_eq!(
        backend.complete(&config().request("p")).unwrap_err(),
        LlmError::RateLimited { attempts: 5 }
    );
}

#[test]
fn client_errors_are_not_retried() {
    let s = stub(vec![401], "never");
    let url = serve(s.clone());
    let backend = HttpBackend::new(url, None).unwrap().with_retry(fast_retry());
    assert_eq!(
        backend.complete(&config().request("p")).unwrap_err(),
        LlmError::Http { status: 401 }
    );
    assert_eq!(s.hits.load(Ordering::SeqCst), 1);
}

#[test]
fn failed_live_samples_are_not_cached() {
    let s = stub(vec![500; 5], "never");
    let url = serve(s);
    let backend = Arc::new(HttpBackend::new(url, None).unwrap().with_retry(fast_retry()));
    let dir = tempfile::tempdir().unwrap();
    let gen = Generator::live(backend, ResponseCache::open(dir.path()).unwrap(), 1);
    assert_eq!(gen.generate(&config(), "p", 1).unwrap_err().code(), "http-error");
    assert!(gen.cache().keys().unwrap().is_empty());
}

#[test]
fn replay_hits_and_misses() {
    let dir = tempfile::tempdir().unwrap();
    let cache = ResponseCache::open(dir.path()).unwrap();
    let cfg = config();
    for i in 0..3 {
        cache
            .put(&CacheEntry {
                key: cache_key(&cfg, "p", i),
                category: cfg.category,
                prompt: "p".into(),
                index: i,
                response: format!("r{i}"),
            })
            .unwrap();
    }
    let gen = Generator::replay(cache);
    let out = gen.generate(&cfg, "p", 3).unwrap();
    assert_eq!(out.iter().map(|g| g.text.as_str()).collect::<Vec<_>>(), ["r0", "r1", "r2"]);
    assert!(gen.request_log().is_empty());
    let err = gen.generate(&cfg, "p", 4).unwrap_err();
    assert_eq!(err.code(), "cache-miss");
    assert_eq!(gen.generate(&cfg, "p", 0).unwrap_err().code(), "no-samples");
}
