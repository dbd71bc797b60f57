//! HTTP service exposing interactive sessions.
//!
//! Routes:
//!
//! | method | path                      | body                           |
//! |--------|---------------------------|--------------------------------|
//! | POST   | `/sessions`               | `{"program": …}` or `{"fixture": name}` |
//! | GET    | `/sessions/{id}`          |                                |
//! | POST   | `/sessions/{id}/decision` | `{"verdict": …, "targets": […]}` |
//! | GET    | `/sessions/{id}/trace`    |                                |
//! | GET    | `/fixtures`               |                                |
//!
//! Errors are `{"code": …, "message": …}` with status 400, 404 or 409.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tokio::sync::Mutex;

use it2fgp::dialogue::{open_session, Decision, DialogueError, Failure, Proposal, Session, SessionConfig, SessionStatus};
use it2fgp::fixtures::{fixture, FIXTURE_NAMES};
use it2fgp::sigmodel::{validate_program, FuzzyProgram};

use crate::numfmt::{to_rounded_string_pretty, to_rounded_value};

#[derive(Debug, Clone, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError { status, code, message: message.into() }
    }

    fn not_found(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not-found", format!("no session {id}"))
    }

    fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(&self)).into_response()
    }
}

impl From<DialogueError> for ApiError {
    fn from(e: DialogueError) -> Self {
        let (status, code) = match &e {
            DialogueError::InvalidDecision(_) => (StatusCode::BAD_REQUEST, "invalid-decision"),
            DialogueError::InvalidState(_) => (StatusCode::CONFLICT, "invalid-state"),
            DialogueError::NoProgress { .. } => (StatusCode::CONFLICT, "no-progress"),
            DialogueError::Stage { .. } => (StatusCode::CONFLICT, "stage-failed"),
        };
        ApiError::new(status, code, e.to_string())
    }
}

fn rounded<T: Serialize>(status: StatusCode, body: &T) -> Response {
    match to_rounded_value(body) {
        Ok(v) => (status, Json(v)).into_response(),
        Err(e) => ApiError::internal(e.to_string()).into_response(),
    }
}

fn parse_body<T: for<'de> Deserialize<'de>>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "bad-request", e.to_string()))
}

pub struct SessionEntry {
    pub id: String,
    pub created_at: u64,
    pub session: Session,
}

/// Shared service state. Each session sits behind its own lock so that
/// distinct sessions are served in parallel.
pub struct AppState {
    sessions: RwLock<HashMap<String, Arc<Mutex<SessionEntry>>>>,
    next_id: AtomicU64,
    config: SessionConfig,
    trace_dir: Option<PathBuf>,
}

impl AppState {
    pub fn new(config: SessionConfig, trace_dir: Option<PathBuf>) -> Arc<Self> {
        Arc::new(AppState {
            sessions: RwLock::new(HashMap::new()),
            next_id: AtomicU64::new(1),
            config,
            trace_dir,
        })
    }

    fn entry(&self, id: &str) -> Result<Arc<Mutex<SessionEntry>>, ApiError> {
        let map = self.sessions.read().expect("session map lock");
        map.get(id).cloned().ok_or_else(|| ApiError::not_found(id))
    }

    fn persist(&self, entry: &SessionEntry) {
        let Some(dir) = &self.trace_dir else { return };
        let path = dir.join(format!("{}.json", entry.id));
        let written = to_rounded_string_pretty(&entry.session.trace())
            .map_err(std::io::Error::from)
            .and_then(|text| std::fs::write(&path, text));
        if let Err(e) = written {
            tracing::warn!(path = %path.display(), error = %e, "could not write trace");
        }
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/decision", post(decide))
        .route("/sessions/{id}/trace", get(get_trace))
        .route("/fixtures", get(list_fixtures))
        .with_state(state)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateRequest {
    program: Option<FuzzyProgram>,
    fixture: Option<String>,
}

#[derive(Debug, Serialize)]
struct ProposalResponse<'a> {
    id: &'a str,
    status: SessionStatus,
    proposal: Option<&'a Proposal>,
    #[serde(skip_serializing_if = "Option::is_none")]
    failure: Option<&'a Failure>,
}

impl<'a> ProposalResponse<'a> {
    fn of(e: &'a SessionEntry) -> Self {
        ProposalResponse {
            id: &e.id,
            status: e.session.status,
            proposal: e.session.proposal(),
            failure: e.session.failure.as_ref(),
        }
    }
}

async fn create_session(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Response, ApiError> {
    let req: CreateRequest = parse_body(&body)?;
    let program = match (req.program, req.fixture) {
        (Some(p), None) => p,
        (None, Some(name)) => fixture(&name)
            .ok_or_else(|| ApiError::new(StatusCode::BAD_REQUEST, "unknown-fixture", format!("no fixture named {name}")))?,
        _ => {
            return Err(ApiError::new(StatusCode::BAD_REQUEST, "bad-request", "give exactly one of program or fixture"));
        }
    };
    let report = validate_program(&program, false);
    if !report.is_ok() {
        let msgs: Vec<String> = report.errors.iter().map(|i| format!("{}: {}", i.location, i.message)).collect();
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "invalid-program", msgs.join("; ")));
    }
    let config = state.config.clone();
    let session = tokio::task::spawn_blocking(move || open_session(&program, config))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?;
    let id = format!("s{:06}", state.next_id.fetch_add(1, Ordering::Relaxed));
    let created_at = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let entry = SessionEntry { id: id.clone(), created_at, session };
    state.persist(&entry);
    let resp = rounded(StatusCode::CREATED, &ProposalResponse::of(&entry));
    tracing::info!(%id, status = %entry.session.status, "session opened");
    state.sessions.write().expect("session map lock").insert(id, Arc::new(Mutex::new(entry)));
    Ok(resp)
}

#[derive(Serialize)]
struct SessionState<'a> {
    id: &'a str,
    created_at: u64,
    status: SessionStatus,
    session: &'a Session,
}

async fn get_session(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let entry = state.entry(&id)?;
    let e = entry.lock().await;
    Ok(rounded(
        StatusCode::OK,
        &SessionState { id: &e.id, created_at: e.created_at, status: e.session.status, session: &e.session },
    ))
}

async fn decide(State(state): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> Result<Response, ApiError> {
    let entry = state.entry(&id)?;
    let d: Decision = parse_body(&body)?;
    let guard = entry.lock_owned().await;
    let state2 = state.clone();
    tokio::task::spawn_blocking(move || {
        let mut e = guard;
        let outcome = e.session.decide(d).map(|_| ());
        if outcome.is_ok() {
            state2.persist(&e);
        }
        outcome?;
        Ok(rounded(StatusCode::OK, &ProposalResponse::of(&e)))
    })
    .await
    .map_err(|e| ApiError::internal(e.to_string()))?
}

async fn get_trace(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let entry = state.entry(&id)?;
    let e = entry.lock().await;
    Ok(rounded(StatusCode::OK, &e.session.trace()))
}

#[derive(Serialize)]
struct FixtureInfo {
    name: &'static str,
    program: FuzzyProgram,
}

async fn list_fixtures() -> Response {
    let list: Vec<FixtureInfo> = FIXTURE_NAMES
        .iter()
        .map(|&name| FixtureInfo { name, program: fixture(name).expect("bundled fixture parses") })
        .collect();
    rounded(StatusCode::OK, &list)
}

/// Binds `127.0.0.1:port` and serves until interrupted.
pub async fn serve(state: Arc<AppState>, port: u16) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(("127.0.0.1", port)).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
