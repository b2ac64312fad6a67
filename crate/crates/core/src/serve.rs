//! Read-only HTTP service for a result bundle, plus verdict upload.
//!
//! `GET /bundle` returns the bundle with every recorded verdict applied.
//! `POST /verdicts` takes one `{"item_id", "verdict"}` object, appends it to
//! the verdict file and updates the served audit status. Appends are
//! serialized; readers never wait on the file.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde_json::json;
use thiserror::Error;
use tokio::net::TcpListener;
use tokio::sync::Mutex;
use tower_http::services::ServeDir;

use crate::analysis::{append_verdict, load_verdicts, AnalysisError, Verdict};
use crate::bundle::ResultBundle;

#[derive(Debug, Error)]
pub enum ServeError {
    #[error("cannot listen on {address}: {source}")]
    Bind {
        address: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Verdicts(#[from] AnalysisError),
    #[error("verdict file names an item without a flag: {0}")]
    UnknownItem(String),
    #[error("server failed: {0}")]
    Io(#[from] std::io::Error),
}

pub struct ServeState {
    bundle: RwLock<ResultBundle>,
    verdicts_path: PathBuf,
    writer: Mutex<()>,
}

impl ServeState {
    /// Applies the verdicts already on file; one naming an unflagged item is
    /// an error.
    pub fn new(mut bundle: ResultBundle, verdicts_path: &Path) -> Result<Self, ServeError> {
        for v in load_verdicts(verdicts_path)? {
            if !apply_verdict(&mut bundle, &v) {
                return Err(ServeError::UnknownItem(v.item_id));
            }
        }
        Ok(ServeState { bundle: RwLock::new(bundle), verdicts_path: verdicts_path.to_path_buf(), writer: Mutex::new(()) })
    }

    pub fn bundle(&self) -> ResultBundle {
        self.bundle.read().expect("bundle lock").clone()
    }
}

/// Sets the status on the item's flag and audit entry. False when the item
/// carries no flag.
pub fn apply_verdict(bundle: &mut ResultBundle, verdict: &Verdict) -> bool {
    let mut found = false;
    for f in bundle.flags.iter_mut().filter(|f| f.item_id == verdict.item_id) {
        f.status = verdict.verdict;
        found = true;
    }
    for e in bundle.audit.entries.iter_mut().filter(|e| e.item_id == verdict.item_id) {
        e.status = verdict.verdict;
        found = true;
    }
    found
}

fn bad_request(reason: impl Into<String>) -> Response {
    (StatusCode::BAD_REQUEST, Json(json!({ "error": reason.into() }))).into_response()
}

async fn get_bundle(State(state): State<Arc<ServeState>>) -> Response {
    let body = state.bundle.read().expect("bundle lock").to_json();
    ([(header::CONTENT_TYPE, "application/json")], body).into_response()
}

async fn post_verdict(State(state): State<Arc<ServeState>>, body: Bytes) -> Response {
    let verdict: Verdict = match serde_json::from_slice(&body) {
        Ok(v) => v,
        Err(e) => return bad_request(format!("malformed verdict: {e}")),
    };
    let known = state.bundle.read().expect("bundle lock").flags.iter().any(|f| f.item_id == verdict.item_id);
    if !known {
        return bad_request(format!("no flagged item {:?}", verdict.item_id));
    }
    let _guard = state.writer.lock().await;
    if let Err(e) = append_verdict(&state.verdicts_path, &verdict) {
        return (StatusCode::INTERNAL_SERVER_ERROR, Json(json!({ "error": e.to_string() }))).into_response();
    }
    apply_verdict(&mut state.bundle.write().expect("bundle lock"), &verdict);
    (StatusCode::OK, Json(json!({ "item_id": verdict.item_id, "verdict": verdict.verdict }))).into_response()
}

pub fn router(state: Arc<ServeState>, assets: Option<&Path>) -> Router {
    let app = Router::new()
        .route("/bundle", get(get_bundle))
        .route("/verdicts", post(post_verdict))
        .with_state(state);
    match assets {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app,
    }
}

pub async fn bind(address: &str) -> Result<TcpListener, ServeError> {
    TcpListener::bind(address).await.map_err(|source| ServeError::Bind { address: address.into(), source })
}

/// Serves until `shutdown` resolves.
pub async fn serve(
    listener: TcpListener,
    app: Router,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> Result<(), ServeError> {
    axum::serve(listener, app).with_graceful_shutdown(shutdown).await?;
    Ok(())
}

pub fn local_addr(listener: &TcpListener) -> Option<SocketAddr> {
    listener.local_addr().ok()
}
