//! HTTP sessions for interactive segmentation.
//!
//! A client uploads an image, posts strokes one at a time, triggers runs and
//! fetches the resulting rasters. Each session admits one mutating request
//! at a time; a second one gets 409 instead of waiting.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Multipart, Path as UrlPath, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use rwseg_core::imageio;
use rwseg_core::Error;
use serde_json::json;

pub mod session;

pub use session::{Artifacts, RunParams, RunSummary, SeedCounts, Session, SessionInfo, StrokeOp};
use session::{execute, RunInput};

pub const DEFAULT_BIND: &str = "127.0.0.1:8080";
pub const DEFAULT_MAX_PIXELS: usize = 1 << 20;
/// Upload cap; a 1 MP RGB PNG is at most a few MB.
const MAX_BODY_BYTES: usize = 64 << 20;

#[derive(Debug, Clone)]
pub struct Config {
    pub bind: SocketAddr,
    pub session_dir: Option<PathBuf>,
    pub max_pixels: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            bind: DEFAULT_BIND.parse().expect("valid default address"),
            session_dir: None,
            max_pixels: DEFAULT_MAX_PIXELS,
        }
    }
}

impl Config {
    /// Reads RWSEG_BIND, RWSEG_SESSION_DIR and RWSEG_MAX_PIXELS.
    pub fn from_env() -> Result<Self, String> {
        let mut c = Config::default();
        if let Ok(v) = std::env::var("RWSEG_BIND") {
            c.bind = v.parse().map_err(|e| format!("RWSEG_BIND={v:?}: {e}"))?;
        }
        if let Some(v) = std::env::var_os("RWSEG_SESSION_DIR").filter(|v| !v.is_empty()) {
            c.session_dir = Some(PathBuf::from(v));
        }
        if let Ok(v) = std::env::var("RWSEG_MAX_PIXELS") {
            c.max_pixels = v
                .parse()
                .ok()
                .filter(|&n: &usize| n >= 4)
                .ok_or_else(|| format!("RWSEG_MAX_PIXELS={v:?} is not an integer >= 4"))?;
        }
        Ok(c)
    }
}

struct Slot {
    busy: AtomicBool,
    session: Mutex<Session>,
}

/// Clears the busy flag when dropped, including on panic or cancellation.
struct BusyGuard(Arc<Slot>);

impl Drop for BusyGuard {
    fn drop(&mut self) {
        self.0.busy.store(false, Ordering::Release);
    }
}

#[derive(Clone)]
pub struct AppState {
    sessions: Arc<RwLock<HashMap<String, Arc<Slot>>>>,
    session_dir: Option<PathBuf>,
    max_pixels: usize,
}

impl AppState {
    /// Builds the store, recovering every session found in the session
    /// directory. Unreadable session directories are skipped with a warning.
    pub fn new(config: &Config) -> std::io::Result<Self> {
        let mut sessions = HashMap::new();
        if let Some(dir) = &config.session_dir {
            std::fs::create_dir_all(dir)?;
            for entry in std::fs::read_dir(dir)? {
                let path = entry?.path();
                if !path.is_dir() {
                    continue;
                }
                match Session::recover(&path) {
                    Ok(s) => {
                        sessions.insert(s.id.clone(), Arc::new(slot(s)));
                    }
                    Err(e) => eprintln!("warning: skipping session {}: {e}", path.display()),
                }
            }
        }
        Ok(AppState {
            sessions: Arc::new(RwLock::new(sessions)),
            session_dir: config.session_dir.clone(),
            max_pixels: config.max_pixels,
        })
    }

    pub fn session_count(&self) -> usize {
        self.sessions.read().unwrap().len()
    }

    fn slot(&self, id: &str) -> Result<Arc<Slot>, ApiError> {
        self.sessions
            .read()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(format!("no session {id:?}")))
    }

    /// The slot with its busy flag taken, or 409.
    fn claim(&self, id: &str) -> Result<BusyGuard, ApiError> {
        let slot = self.slot(id)?;
        if slot.busy.compare_exchange(false, true, Ordering::AcqRel, Ordering::Acquire).is_err() {
            return Err(ApiError::new(
                StatusCode::CONFLICT,
                "busy",
                format!("session {id:?} is already processing a request"),
            ));
        }
        Ok(BusyGuard(slot))
    }
}

fn slot(s: Session) -> Slot {
    Slot {
        busy: AtomicBool::new(false),
        session: Mutex::new(s),
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: serde_json::Value,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            body: json!({ "error": message.into(), "code": code }),
        }
    }

    fn not_found(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, "not_found", message)
    }

    fn unprocessable(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_input", message)
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        match e {
            Error::ConvexityViolation { lambda, min_weight } => ApiError {
                status: StatusCode::UNPROCESSABLE_ENTITY,
                body: json!({
                    "error": message,
                    "code": "convexity_violation",
                    "lambda": lambda,
                    "max_lambda": min_weight,
                }),
            },
            Error::SolverFailure { .. } | Error::NotPositiveDefinite | Error::SingularSystem => {
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "solver_failure", message)
            }
            Error::Io(_) => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "io", message),
            _ => ApiError::unprocessable(message),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(session_info).delete(delete_session))
        .route("/sessions/{id}/strokes", post(post_stroke))
        .route("/sessions/{id}/segment", post(segment))
        .route("/sessions/{id}/{artifact}", get(artifact))
        .layer(DefaultBodyLimit::max(MAX_BODY_BYTES))
        .with_state(state)
}

/// Multipart fields: `image` (required) and `trimap` (optional ground truth).
async fn create_session(State(state): State<AppState>, mut form: Multipart) -> Result<Response, ApiError> {
    let (mut image, mut trimap) = (None, None);
    while let Some(field) = form.next_field().await.map_err(|e| ApiError::unprocessable(e.body_text()))? {
        let name = field.name().unwrap_or_default().to_string();
        let bytes = field.bytes().await.map_err(|e| ApiError::unprocessable(e.body_text()))?;
        match name.as_str() {
            "image" => image = Some(bytes),
            "trimap" => trimap = Some(bytes),
            other => return Err(ApiError::unprocessable(format!("unexpected form field {other:?}"))),
        }
    }
    let image = image.ok_or_else(|| ApiError::unprocessable("missing form field \"image\""))?;
    let max_pixels = state.max_pixels;
    let root = state.session_dir.clone();
    let session = tokio::task::spawn_blocking(move || build_session(&image, trimap.as_ref(), max_pixels, root.as_deref()))
        .await
        .expect("session construction does not panic")?;
    let info = session.info();
    state.sessions.write().unwrap().insert(info.id.clone(), Arc::new(slot(session)));
    Ok((StatusCode::CREATED, Json(info)).into_response())
}

fn build_session(image: &[u8], trimap: Option<&Bytes>, max_pixels: usize, root: Option<&Path>) -> Result<Session, ApiError> {
    let image = imageio::decode_image(image)?;
    if image.len() > max_pixels {
        return Err(ApiError::new(
            StatusCode::PAYLOAD_TOO_LARGE,
            "too_large",
            format!("image has {} pixels; the limit is {max_pixels}", image.len()),
        ));
    }
    let dims = Some((image.width(), image.height()));
    let trimap = trimap.map(|t| imageio::decode_trimap(t, dims)).transpose()?;
    Ok(Session::create(uuid::Uuid::new_v4().simple().to_string(), image, trimap, root)?)
}

async fn session_info(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> Result<Json<SessionInfo>, ApiError> {
    let slot = state.slot(&id)?;
    let mut info = slot.session.lock().unwrap().info();
    info.busy = slot.busy.load(Ordering::Acquire);
    Ok(Json(info))
}

async fn delete_session(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> Result<StatusCode, ApiError> {
    let guard = state.claim(&id)?;
    state.sessions.write().unwrap().remove(&id);
    guard.0.session.lock().unwrap().purge()?;
    Ok(StatusCode::NO_CONTENT)
}

async fn post_stroke(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    Json(op): Json<StrokeOp>,
) -> Result<Json<SeedCounts>, ApiError> {
    let guard = state.claim(&id)?;
    let counts = guard.0.session.lock().unwrap().apply(op)?;
    Ok(Json(counts))
}

/// Runs synchronously from the client's point of view; the solve itself
/// happens on the blocking pool with the session lock released.
async fn segment(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> Result<Json<RunSummary>, ApiError> {
    let params: RunParams = if body.iter().all(u8::is_ascii_whitespace) {
        RunParams::default()
    } else {
        serde_json::from_slice(&body).map_err(|e| ApiError::unprocessable(format!("bad run parameters: {e}")))?
    };
    let guard = state.claim(&id)?;
    let input = {
        let s = guard.0.session.lock().unwrap();
        RunInput {
            image: s.image.clone(),
            trimap: s.trimap.clone(),
            seeds: s.seeds(),
            params,
        }
    };
    let artifacts = tokio::task::spawn_blocking(move || execute(&input))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "panic", e.to_string()))??;
    let summary = artifacts.summary.clone();
    guard.0.session.lock().unwrap().store_run(artifacts)?;
    Ok(Json(summary))
}

async fn artifact(
    State(state): State<AppState>,
    UrlPath((id, name)): UrlPath<(String, String)>,
) -> Result<Response, ApiError> {
    let (mime, bytes): (&str, fn(&Artifacts) -> &[u8]) = match name.as_str() {
        "probability.png" => ("image/png", |a| &a.probability_png),
        "labels.png" => ("image/png", |a| &a.labels_png),
        "boundary.png" => ("image/png", |a| &a.boundary_png),
        "probability.pmap" => ("application/octet-stream", |a| &a.probability_pmap),
        "trace.json" => ("application/json", |a| &a.trace_json),
        _ => return Err(ApiError::not_found(format!("no resource {name:?}"))),
    };
    let slot = state.slot(&id)?;
    let s = slot.session.lock().unwrap();
    let last = s
        .last
        .as_ref()
        .ok_or_else(|| ApiError::not_found(format!("session {id:?} has no segmentation yet")))?;
    Ok(([(header::CONTENT_TYPE, mime)], bytes(last).to_vec()).into_response())
}
