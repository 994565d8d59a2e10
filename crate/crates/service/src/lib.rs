//! HTTP/JSON front end that lets a person act as the decision maker of a
//! live run.
//!
//! | method | path                      | purpose                         |
//! |--------|---------------------------|---------------------------------|
//! | POST   | `/sessions`               | start a run from a config       |
//! | GET    | `/sessions/{id}`          | progress snapshot               |
//! | GET    | `/sessions/{id}/pending`  | candidates awaiting scores      |
//! | POST   | `/sessions/{id}/scores`   | submit `{ "scores": {id: v} }`  |
//! | POST   | `/sessions/{id}/abort`    | cancel                          |
//! | GET    | `/sessions/{id}/events`   | server-sent phase changes       |
//!
//! Errors are `application/problem+json` documents carrying a stable
//! `code`: `not_found`, `invalid_scores`, `conflict`, `invalid_config`.

use std::collections::{BTreeMap, HashMap};
use std::convert::Infallible;
use std::net::SocketAddr;
use std::sync::{Arc, RwLock};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::sse::{Event as SseEvent, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::stream::{self, Stream, StreamExt};
use iemo::ConfigFile;
use serde::{Deserialize, Serialize};
use tokio::sync::broadcast;

pub mod session;

pub use session::{Candidate, Event, PendingBatch, Phase, Session, SessionError, Snapshot};

/// Environment variable holding the listen address.
pub const BIND_VAR: &str = "IEMO_BIND";
pub const DEFAULT_BIND: &str = "127.0.0.1:8080";

pub fn bind_address() -> Result<SocketAddr, String> {
    let raw = std::env::var(BIND_VAR).unwrap_or_else(|_| DEFAULT_BIND.to_string());
    raw.parse().map_err(|e| format!("{BIND_VAR}={raw}: {e}"))
}

#[derive(Default, Clone)]
pub struct AppState {
    sessions: Arc<RwLock<HashMap<String, Arc<Session>>>>,
}

impl AppState {
    fn get(&self, id: &str) -> Result<Arc<Session>, Problem> {
        self.sessions
            .read()
            .unwrap_or_else(|p| p.into_inner())
            .get(id)
            .cloned()
            .ok_or_else(|| Problem::not_found(id))
    }
}

/// RFC 7807 error body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    #[serde(rename = "type")]
    pub kind: String,
    pub title: String,
    pub status: u16,
    pub code: String,
    pub detail: String,
}

impl Problem {
    fn new(status: StatusCode, code: &str, detail: impl Into<String>) -> Self {
        Self {
            kind: format!("urn:iemo:problem:{code}"),
            title: status.canonical_reason().unwrap_or("error").to_string(),
            status: status.as_u16(),
            code: code.to_string(),
            detail: detail.into(),
        }
    }

    fn not_found(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", format!("no session {id}"))
    }
}

impl From<SessionError> for Problem {
    fn from(e: SessionError) -> Self {
        match e {
            SessionError::InvalidScores(d) => Self::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_scores", d),
            SessionError::Conflict(d) => Self::new(StatusCode::CONFLICT, "conflict", d),
        }
    }
}

impl IntoResponse for Problem {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (
            status,
            [(header::CONTENT_TYPE, "application/problem+json")],
            serde_json::to_string(&self).unwrap_or_default(),
        )
            .into_response()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Created {
    pub id: String,
    pub snapshot: Snapshot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PendingResponse {
    pub phase: Phase,
    pub batch: Option<PendingBatch>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSubmission {
    pub scores: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ack {
    pub phase: Phase,
}

async fn create(
    State(app): State<AppState>,
    body: Result<Json<ConfigFile>, JsonRejection>,
) -> Result<(StatusCode, Json<Created>), Problem> {
    let Json(file) = body.map_err(|e| Problem::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_config", e.body_text()))?;
    let config = file
        .resolve()
        .map_err(|e| Problem::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_config", e.to_string()))?;
    let id = uuid::Uuid::new_v4().simple().to_string();
    let session = Session::start(id.clone(), config);
    // Taken before the engine has had a chance to report.
    let snapshot = Snapshot {
        id: id.clone(),
        phase: Phase::Running,
        generation: 0,
        generations: session.config.generations,
        consultations: 0,
        trajectory: Vec::new(),
        records: Vec::new(),
        final_objectives: None,
        error: None,
    };
    app.sessions
        .write()
        .unwrap_or_else(|p| p.into_inner())
        .insert(id.clone(), session);
    Ok((StatusCode::CREATED, Json(Created { id, snapshot })))
}

async fn state(State(app): State<AppState>, Path(id): Path<String>) -> Result<Json<Snapshot>, Problem> {
    Ok(Json(app.get(&id)?.snapshot()))
}

async fn pending(State(app): State<AppState>, Path(id): Path<String>) -> Result<Json<PendingResponse>, Problem> {
    let (phase, batch) = app.get(&id)?.pending();
    Ok(Json(PendingResponse { phase, batch }))
}

async fn scores(
    State(app): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<ScoreSubmission>, JsonRejection>,
) -> Result<Json<Ack>, Problem> {
    let session = app.get(&id)?;
    let Json(sub) = body.map_err(|e| Problem::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_scores", e.body_text()))?;
    session.submit(&sub.scores)?;
    Ok(Json(Ack { phase: session.phase() }))
}

async fn abort(State(app): State<AppState>, Path(id): Path<String>) -> Result<Json<Ack>, Problem> {
    let session = app.get(&id)?;
    session.abort()?;
    Ok(Json(Ack { phase: Phase::Aborted }))
}

fn event_stream(first: Event, rx: broadcast::Receiver<Event>) -> impl Stream<Item = Result<SseEvent, Infallible>> {
    let rest = stream::unfold(Some(rx), |rx| async move {
        let mut rx = rx?;
        loop {
            match rx.recv().await {
                Ok(ev) => {
                    let done = matches!(ev.phase, Phase::Finished | Phase::Aborted);
                    return Some((ev, if done { None } else { Some(rx) }));
                }
                Err(broadcast::error::RecvError::Lagged(_)) => continue,
                Err(broadcast::error::RecvError::Closed) => return None,
            }
        }
    });
    stream::once(async move { first })
        .chain(rest)
        .map(|ev| Ok(SseEvent::default().event("phase").json_data(&ev).unwrap_or_default()))
}

async fn events(
    State(app): State<AppState>,
    Path(id): Path<String>,
) -> Result<Sse<impl Stream<Item = Result<SseEvent, Infallible>>>, Problem> {
    let (first, rx) = app.get(&id)?.subscribe();
    Ok(Sse::new(event_stream(first, rx)).keep_alive(KeepAlive::default()))
}

pub fn router(app: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}", get(state))
        .route("/sessions/{id}/pending", get(pending))
        .route("/sessions/{id}/scores", post(scores))
        .route("/sessions/{id}/abort", post(abort))
        .route("/sessions/{id}/events", get(events))
        .with_state(app)
}

/// Serves until the listener fails.
pub async fn serve(listener: tokio::net::TcpListener) -> std::io::Result<()> {
    axum::serve(listener, router(AppState::default())).await
}
