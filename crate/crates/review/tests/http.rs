use std::path::Path;
use std::sync::Arc;

use axum::body::{to_bytes, Body};
use axum::http::{Request, StatusCode};
use axum::Router;
use serde_json::{json, Value};
use tower::ServiceExt;

use chartsynth::bench::{apply_verdicts, read_manifest, DEFAULT_RHO};
use chartsynth::model::ChartType;
use chartsynth::pipeline::{gold_values, Pipeline, PipelineConfig};
use chartsynth::review::{ManualClock, ReviewQueue, VerdictStore, DEFAULT_LEASE_MS};
use chartsynth_review::router;

fn build(root: &Path) {
    let config = PipelineConfig {
        chart_types: vec![ChartType::VerticalBar],
        m: 4,
        n: 3,
        seed: 5,
        output: root.to_path_buf(),
        per_type: 3,
        workers: 1,
        ..Default::default()
    };
    Pipeline::new(config).unwrap().run_all().unwrap();
}

fn app(root: &Path, clock: Arc<ManualClock>) -> Router {
    let manifest = read_manifest(&root.join("benchmark/manifest.jsonl")).unwrap();
    let store = VerdictStore::open(&root.join("benchmark/verdicts.jsonl")).unwrap();
    let queue = ReviewQueue::new(manifest, store, clock, Box::new(gold_values(root)));
    router(queue, root.to_path_buf(), None)
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Vec<u8>) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req.header("content-type", "application/json").body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    (status, to_bytes(resp.into_body(), usize::MAX).await.unwrap().to_vec())
}

async fn json_call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (status, bytes) = call(app, method, uri, body).await;
    (status, if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() })
}

fn keep(entry: &str, who: &str) -> Value {
    json!({"entry_id": entry, "validity": true, "extractability": true, "annotator_id": who})
}

#[tokio::test]
async fn queue_leases_distinct_items_and_expires() {
    let dir = tempfile::tempdir().unwrap();
    build(dir.path());
    let clock = Arc::new(ManualClock::new(1_000));
    let app = app(dir.path(), clock.clone());

    let mut seen = Vec::new();
    for who in ["a", "b", "c"] {
        let (status, item) = json_call(&app, "GET", &format!("/api/queue/next?annotator={who}"), None).await;
        assert_eq!(status, StatusCode::OK);
        assert_eq!(item["status"], "pending");
        seen.push(item["entry_id"].as_str().unwrap().to_string());
    }
    seen.sort();
    seen.dedup();
    assert_eq!(seen.len(), 3);

    let (_, again) = json_call(&app, "GET", "/api/queue/next?annotator=a", None).await;
    let held_by_a = again["entry_id"].as_str().unwrap().to_string();
    let (status, _) = json_call(&app, "POST", "/api/verdict", Some(keep(&held_by_a, "b"))).await;
    assert_eq!(status, StatusCode::CONFLICT);

    // every item is leased until the lease runs out
    let (status, _) = call(&app, "GET", "/api/queue/next?annotator=d", None).await;
    assert_eq!(status, StatusCode::NO_CONTENT);
    clock.advance(DEFAULT_LEASE_MS);
    let (status, item) = json_call(&app, "GET", "/api/queue/next?annotator=d", None).await;
    assert_eq!(status, StatusCode::OK);
    assert!(seen.contains(&item["entry_id"].as_str().unwrap().to_string()));

    let (status, _) = call(&app, "GET", "/api/queue/next", None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn verdicts_are_validated_idempotent_and_durable() {
    let dir = tempfile::tempdir().unwrap();
    build(dir.path());
    let clock = Arc::new(ManualClock::new(1_000));
    let app = app(dir.path(), clock.clone());

    let (_, progress) = json_call(&app, "GET", "/api/progress", None).await;
    assert_eq!(progress, json!({"pending": 3, "done": 0, "kept_estimate": 0}));

    let (_, item) = json_call(&app, "GET", "/api/queue/next?annotator=a", None).await;
    let id = item["entry_id"].as_str().unwrap().to_string();

    let mut bad = keep(&id, "a");
    bad["extractability"] = json!(false);
    bad["extracted_values"] = json!([1.0]);
    let (status, body) = json_call(&app, "POST", "/api/verdict", Some(bad)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY, "{body}");

    let (status, _) = json_call(&app, "POST", "/api/verdict", Some(keep("nope-0000", "a"))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    let (status, ack) = json_call(&app, "POST", "/api/verdict", Some(keep(&id, "a"))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(ack, json!({"entry_id": id, "duplicate": false}));
    let (_, ack) = json_call(&app, "POST", "/api/verdict", Some(keep(&id, "a"))).await;
    assert_eq!(ack["duplicate"], true);
    let mut drop = keep(&id, "a");
    drop["validity"] = json!(false);
    let (status, _) = json_call(&app, "POST", "/api/verdict", Some(drop.clone())).await;
    assert_eq!(status, StatusCode::CONFLICT);

    // a second, unleased item dropped by another annotator
    let (_, other) = json_call(&app, "GET", "/api/queue/next?annotator=b", None).await;
    drop["entry_id"] = other["entry_id"].clone();
    drop["annotator_id"] = json!("b");
    assert_eq!(json_call(&app, "POST", "/api/verdict", Some(drop)).await.0, StatusCode::OK);

    let (_, progress) = json_call(&app, "GET", "/api/progress", None).await;
    assert_eq!(progress, json!({"pending": 1, "done": 2, "kept_estimate": 1}));

    // restart over the same log
    let restarted = self::app(dir.path(), clock);
    let (_, after) = json_call(&restarted, "GET", "/api/progress", None).await;
    assert_eq!(after, progress);

    let manifest = read_manifest(&dir.path().join("benchmark/manifest.jsonl")).unwrap();
    let store = VerdictStore::open(&dir.path().join("benchmark/verdicts.jsonl")).unwrap();
    let outcome = apply_verdicts(&manifest, store.verdicts(), gold_values(dir.path()), DEFAULT_RHO);
    assert_eq!(outcome.manifest.entries.len(), 1);
    assert_eq!(outcome.manifest.entries[0].entry_id, id);
}

#[tokio::test]
async fn images_are_served_from_the_root() {
    let dir = tempfile::tempdir().unwrap();
    build(dir.path());
    let app = app(dir.path(), Arc::new(ManualClock::new(0)));
    let (_, item) = json_call(&app, "GET", "/api/queue/next?annotator=a", None).await;
    let url = item["image_url"].as_str().unwrap();
    assert!(url.starts_with("/images/vertical_bar/"), "{url}");

    let (status, bytes) = call(&app, "GET", url, None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(&bytes[..8], b"\x89PNG\r\n\x1a\n");

    assert_eq!(call(&app, "GET", "/images/vertical_bar/missing.png", None).await.0, StatusCode::NOT_FOUND);
    assert_eq!(call(&app, "GET", "/images/../config.json", None).await.0, StatusCode::BAD_REQUEST);
}
