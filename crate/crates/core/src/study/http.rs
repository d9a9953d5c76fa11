//! HTTP front end of the study service.
//!
//! - `POST /jobs` (bearer admin token): enqueue recognition or probe jobs.
//! - `GET /jobs/next?subject=ID`: next eligible job, or 204 when none.
//! - `POST /jobs/{id}/response` `{subject, text}`: submit an answer.
//! - `GET /configs/{id}/status`: progress or record of a configuration.

use std::net::SocketAddr;
use std::sync::Arc;
use std::thread::JoinHandle;

use axum::extract::{Path, Query, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};
use tokio::sync::oneshot;

use super::service::{AssignedJob, StudyService};
use super::{JobKind, Probe, ProbeMarker, StudyError};
use crate::config::VideoConfig;
use crate::io::gif::encode_loop;
use crate::io::png::encode_png;
use crate::io::IoError;
use crate::oracle::human::StudyStatus;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnqueueRequest {
    Recognition {
        configs: Vec<VideoConfig>,
        n_subjects: u32,
    },
    Probe {
        config: VideoConfig,
        probes: Vec<Probe>,
        n_subjects: u32,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnqueueResponse {
    pub job_ids: Vec<u64>,
}

/// What a subject's client receives for one trial.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobPayload {
    pub job_id: u64,
    pub config_id: String,
    pub kind: JobKind,
    pub fps: u32,
    /// Base64 grayscale PNGs, one per frame.
    pub frames: Vec<String>,
    /// Base64 looping GIF of the same frames.
    pub gif: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeMarker>,
    pub deadline_ms: u64,
}

impl JobPayload {
    pub fn from_assigned(assigned: &AssignedJob) -> Result<Self, IoError> {
        let frames = assigned
            .frames
            .iter()
            .map(|f| encode_png(f).map(|b| STANDARD.encode(b)))
            .collect::<Result<Vec<_>, _>>()?;
        let job = &assigned.job;
        Ok(JobPayload {
            job_id: job.job_id,
            config_id: job.config_key.id(),
            kind: job.kind,
            fps: job.config.fps,
            frames,
            gif: STANDARD.encode(encode_loop(&assigned.frames, job.config.fps)?),
            probe: job.probe.as_ref().map(Probe::marker),
            deadline_ms: assigned.deadline_ms,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseSubmission {
    pub subject: String,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
}

#[derive(Deserialize)]
struct NextQuery {
    subject: String,
}

#[derive(Clone)]
struct AppState {
    service: Arc<StudyService>,
    admin_token: Arc<str>,
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(ErrorBody { error: message.into() })).into_response()
}

fn study_error(e: StudyError) -> Response {
    let status = match e {
        StudyError::UnknownJob(_) => StatusCode::NOT_FOUND,
        StudyError::NotAssigned(_) => StatusCode::FORBIDDEN,
        StudyError::DeadlineExpired(_) => StatusCode::GONE,
        StudyError::DuplicateSubmission(_) | StudyError::BatchConflict(_) => StatusCode::CONFLICT,
        _ => StatusCode::UNPROCESSABLE_ENTITY,
    };
    error(status, e.to_string())
}

pub fn router(service: Arc<StudyService>, admin_token: &str) -> Router {
    Router::new()
        .route("/jobs", post(enqueue))
        .route("/jobs/next", get(next_job))
        .route("/jobs/{id}/response", post(submit))
        .route("/configs/{id}/status", get(status))
        .with_state(AppState {
            service,
            admin_token: admin_token.into(),
        })
}

async fn enqueue(State(app): State<AppState>, headers: HeaderMap, Json(req): Json<EnqueueRequest>) -> Response {
    let authorized = headers
        .get("authorization")
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "))
        .is_some_and(|t| t == &*app.admin_token);
    if !authorized {
        return error(StatusCode::UNAUTHORIZED, "admin token required");
    }
    let result = match &req {
        EnqueueRequest::Recognition { configs, n_subjects } => app.service.enqueue_recognition(configs, *n_subjects),
        EnqueueRequest::Probe {
            config,
            probes,
            n_subjects,
        } => app.service.enqueue_probes(config, probes, *n_subjects),
    };
    match result {
        Ok(job_ids) => Json(EnqueueResponse { job_ids }).into_response(),
        Err(e) => study_error(e),
    }
}

async fn next_job(State(app): State<AppState>, Query(q): Query<NextQuery>) -> Response {
    if q.subject.trim().is_empty() {
        return error(StatusCode::BAD_REQUEST, "subject is required");
    }
    match app.service.next_job(&q.subject) {
        None => StatusCode::NO_CONTENT.into_response(),
        Some(assigned) => match JobPayload::from_assigned(&assigned) {
            Ok(payload) => Json(payload).into_response(),
            Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
        },
    }
}

async fn submit(State(app): State<AppState>, Path(id): Path<u64>, Json(body): Json<ResponseSubmission>) -> Response {
    match app.service.submit_response(id, &body.subject, &body.text) {
        Ok(stored) => Json(stored).into_response(),
        Err(e) => study_error(e),
    }
}

async fn status(State(app): State<AppState>, Path(id): Path<String>) -> Json<StudyStatus> {
    Json(match app.service.key_for_id(&id) {
        Some(key) => app.service.status(&key),
        None => StudyStatus::Unknown,
    })
}

/// A study server running on a background thread; stops when dropped.
pub struct ServerHandle {
    addr: SocketAddr,
    shutdown: Option<oneshot::Sender<()>>,
    thread: Option<JoinHandle<()>>,
}

impl ServerHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    /// Blocks until the server exits (it runs until the handle is dropped
    /// from another thread or the process ends).
    pub fn join(mut self) {
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

/// Binds `addr` (port 0 picks a free port) and serves in the background.
pub fn spawn(service: Arc<StudyService>, admin_token: &str, addr: SocketAddr) -> std::io::Result<ServerHandle> {
    let std_listener = std::net::TcpListener::bind(addr)?;
    std_listener.set_nonblocking(true)?;
    let addr = std_listener.local_addr()?;
    let app = router(service, admin_token);
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .worker_threads(2)
        .enable_all()
        .build()?;
    let (tx, rx) = oneshot::channel::<()>();
    let thread = std::thread::spawn(move || {
        runtime.block_on(async move {
            let listener = tokio::net::TcpListener::from_std(std_listener).expect("listener");
            let _ = axum::serve(listener, app)
                .with_graceful_shutdown(async {
                    let _ = rx.await;
                })
                .await;
        });
    });
    Ok(ServerHandle {
        addr,
        shutdown: Some(tx),
        thread: Some(thread),
    })
}
