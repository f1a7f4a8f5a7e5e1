//! HTTP front of the review queue.
//!
//! | route                              | result                                   |
//! |------------------------------------|------------------------------------------|
//! | `GET /api/queue/next?annotator=ID` | 200 item, 204 when nothing is pending    |
//! | `POST /api/verdict`                | 200 ack, 404 unknown, 409 conflict, 422  |
//! | `GET /api/progress`                | 200 `{pending, done, kept_estimate}`     |
//! | `GET /images/<path>`               | PNG from `<root>/images/<path>`          |
//!
//! Anything else is looked up in the optional static directory.

use std::net::SocketAddr;
use std::path::{Component, Path, PathBuf};
use std::sync::{Arc, Mutex};

use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;

use chartsynth::bench::{read_manifest, Verdict, DEFAULT_RHO};
use chartsynth::pipeline::gold_values;
use chartsynth::review::{Clock, ReviewQueue, SubmitError, SystemClock, VerdictStore};

pub struct ServeConfig {
    pub addr: SocketAddr,
    pub manifest: PathBuf,
    pub verdicts: PathBuf,
    /// Output root holding `images/` and `data/`.
    pub root: PathBuf,
    pub static_dir: Option<PathBuf>,
    pub rho: f64,
}

impl ServeConfig {
    /// Paths derived from an output root laid out by the pipeline.
    pub fn for_root(root: &Path, addr: SocketAddr) -> ServeConfig {
        ServeConfig {
            addr,
            manifest: root.join("benchmark").join("manifest.jsonl"),
            verdicts: root.join("benchmark").join("verdicts.jsonl"),
            root: root.to_path_buf(),
            static_dir: None,
            rho: DEFAULT_RHO,
        }
    }
}

struct AppState<C: Clock> {
    queue: Mutex<ReviewQueue<C>>,
    root: PathBuf,
    static_dir: Option<PathBuf>,
}

type Shared<C> = Arc<AppState<C>>;

/// Opens the manifest and verdict log named by `config`.
pub fn open_queue(config: &ServeConfig) -> chartsynth::Result<ReviewQueue<SystemClock>> {
    let manifest = read_manifest(&config.manifest)?;
    let store = VerdictStore::open(&config.verdicts)?;
    let gold = gold_values(&config.root);
    Ok(ReviewQueue::new(manifest, store, SystemClock, Box::new(gold)).with_rho(config.rho))
}

pub fn router<C: Clock + 'static>(queue: ReviewQueue<C>, root: PathBuf, static_dir: Option<PathBuf>) -> Router {
    let state: Shared<C> = Arc::new(AppState { queue: Mutex::new(queue), root, static_dir });
    Router::new()
        .route("/api/queue/next", get(next::<C>))
        .route("/api/verdict", post(verdict::<C>))
        .route("/api/progress", get(progress::<C>))
        .route("/images/{*path}", get(image::<C>))
        .fallback(get(static_file::<C>))
        .with_state(state)
}

pub async fn serve(config: ServeConfig) -> std::io::Result<()> {
    let queue = open_queue(&config).map_err(std::io::Error::other)?;
    let app = router(queue, config.root.clone(), config.static_dir.clone());
    let listener = tokio::net::TcpListener::bind(config.addr).await?;
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    #[derive(serde::Serialize)]
    struct Body {
        error: String,
    }
    (status, Json(Body { error: message.into() })).into_response()
}

#[derive(Deserialize)]
struct NextQuery {
    annotator: Option<String>,
}

async fn next<C: Clock + 'static>(State(s): State<Shared<C>>, Query(q): Query<NextQuery>) -> Response {
    let Some(annotator) = q.annotator.filter(|a| !a.trim().is_empty()) else {
        return error(StatusCode::BAD_REQUEST, "annotator query parameter is required");
    };
    let item = s.queue.lock().expect("queue poisoned").next_item(&annotator);
    match item {
        Some(item) => Json(item).into_response(),
        None => StatusCode::NO_CONTENT.into_response(),
    }
}

/// A verdict as posted; the server stamps it when no timestamp is given.
#[derive(Deserialize)]
struct VerdictBody {
    entry_id: String,
    validity: bool,
    extractability: bool,
    #[serde(default)]
    extracted_values: Option<Vec<f64>>,
    annotator_id: String,
    #[serde(default)]
    timestamp: Option<u64>,
}

async fn verdict<C: Clock + 'static>(State(s): State<Shared<C>>, Json(body): Json<VerdictBody>) -> Response {
    let mut queue = s.queue.lock().expect("queue poisoned");
    let v = Verdict {
        entry_id: body.entry_id,
        validity: body.validity,
        extractability: body.extractability,
        extracted_values: body.extracted_values,
        annotator_id: body.annotator_id,
        timestamp: body.timestamp.unwrap_or_else(|| queue.now_ms()),
    };
    match queue.submit(v) {
        Ok(ack) => Json(ack).into_response(),
        Err(e @ SubmitError::NotFound(_)) => error(StatusCode::NOT_FOUND, e.to_string()),
        Err(e @ SubmitError::Conflict(_)) => error(StatusCode::CONFLICT, e.to_string()),
        Err(e @ SubmitError::Invalid(_)) => error(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()),
        Err(e @ SubmitError::Io(_)) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

async fn progress<C: Clock + 'static>(State(s): State<Shared<C>>) -> Response {
    Json(s.queue.lock().expect("queue poisoned").progress()).into_response()
}

async fn image<C: Clock + 'static>(State(s): State<Shared<C>>, UrlPath(path): UrlPath<String>) -> Response {
    send_file(&s.root.join("images"), &path).await
}

async fn static_file<C: Clock + 'static>(State(s): State<Shared<C>>, uri: Uri) -> Response {
    let Some(dir) = &s.static_dir else {
        return error(StatusCode::NOT_FOUND, "not found");
    };
    let path = uri.path().trim_start_matches('/');
    send_file(dir, if path.is_empty() { "index.html" } else { path }).await
}

/// Reads `rel` under `base`, refusing anything that climbs out of it.
async fn send_file(base: &Path, rel: &str) -> Response {
    let rel = Path::new(rel);
    if rel.components().any(|c| !matches!(c, Component::Normal(_))) {
        return error(StatusCode::BAD_REQUEST, "bad path");
    }
    match tokio::fs::read(base.join(rel)).await {
        Ok(bytes) => ([(header::CONTENT_TYPE, content_type(rel))], bytes).into_response(),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => error(StatusCode::NOT_FOUND, "not found"),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

fn content_type(path: &Path) -> &'static str {
    match path.extension().and_then(|e| e.to_str()) {
        Some("png") => "image/png",
        Some("html") => "text/html; charset=utf-8",
        Some("js") => "text/javascript",
        Some("css") => "text/css",
        Some("json") => "application/json",
        Some("wasm") => "application/wasm",
        _ => "application/octet-stream",
    }
}
