//! HTTP front end. JSON bodies everywhere except the export, which returns
//! one ontology record per line.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

use crate::{JobSpec, Service, SvcError, Verdict};

const PLACEHOLDER_UI: &str = "<!doctype html>\n<html><head><meta charset=\"utf-8\"><title>ANP validation</title></head>\n<body><p>The annotation UI is not built. Start the service with a UI directory to serve it here.</p></body></html>\n";

impl IntoResponse for SvcError {
    fn into_response(self) -> Response {
        let status = match &self {
            SvcError::NotFound(_) => StatusCode::NOT_FOUND,
            SvcError::Forbidden(_) => StatusCode::FORBIDDEN,
            SvcError::Conflict(_) => StatusCode::CONFLICT,
            SvcError::Invalid(_) => StatusCode::UNPROCESSABLE_ENTITY,
            SvcError::Io { .. } | SvcError::Corrupt { .. } => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(ErrorBody { error: self.to_string() })).into_response()
    }
}

#[derive(Serialize)]
struct ErrorBody {
    error: String,
}

#[derive(Deserialize)]
struct WorkerQuery {
    worker: String,
    #[serde(default)]
    country: Option<String>,
}

#[derive(Serialize, Deserialize)]
pub struct CreatedJob {
    pub job_id: String,
    pub created: bool,
}

#[derive(Serialize, Deserialize)]
pub struct QuizAnswers {
    pub answers: Vec<bool>,
}

#[derive(Serialize, Deserialize)]
pub struct Submission {
    pub verdicts: Vec<Verdict>,
}

type AppState = Arc<Service>;
type ApiResult<T> = Result<T, SvcError>;

async fn create_job(State(svc): State<AppState>, Json(spec): Json<JobSpec>) -> ApiResult<(StatusCode, Json<CreatedJob>)> {
    let (job_id, created) = svc.create_job(spec)?;
    let status = if created { StatusCode::CREATED } else { StatusCode::OK };
    Ok((status, Json(CreatedJob { job_id, created })))
}

async fn job_status(State(svc): State<AppState>, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    Ok(Json(svc.status(&id)?))
}

async fn get_quiz(State(svc): State<AppState>, Path(id): Path<String>, Query(q): Query<WorkerQuery>) -> ApiResult<impl IntoResponse> {
    Ok(Json(serde_json::json!({ "items": svc.quiz(&id, &q.worker)? })))
}

async fn post_quiz(
    State(svc): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<WorkerQuery>,
    Json(body): Json<QuizAnswers>,
) -> ApiResult<impl IntoResponse> {
    Ok(Json(svc.take_quiz(&id, &q.worker, &body.answers, q.country.as_deref())?))
}

async fn next_page(State(svc): State<AppState>, Path(id): Path<String>, Query(q): Query<WorkerQuery>) -> ApiResult<impl IntoResponse> {
    Ok(Json(svc.next_page(&id, &q.worker)?))
}

async fn submit(
    State(svc): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<WorkerQuery>,
    Json(body): Json<Submission>,
) -> ApiResult<impl IntoResponse> {
    Ok(Json(svc.submit_judgments(&id, &q.worker, &body.verdicts)?))
}

async fn results(State(svc): State<AppState>, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    Ok(Json(svc.aggregate(&id)?))
}

async fn export(State(svc): State<AppState>, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    let records = svc.export(&id)?;
    let body = anpkit_core::io::to_jsonl(&records);
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson; charset=utf-8")], body))
}

async fn placeholder_ui() -> Html<&'static str> {
    Html(PLACEHOLDER_UI)
}

/// API routes plus the annotation UI under `/ui` (static files from
/// `ui_dir`, or a placeholder page).
pub fn router(svc: Arc<Service>, ui_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/jobs", post(create_job))
        .route("/jobs/{id}", get(job_status))
        .route("/jobs/{id}/quiz", get(get_quiz).post(post_quiz))
        .route("/jobs/{id}/next", get(next_page))
        .route("/jobs/{id}/judgments", post(submit))
        .route("/jobs/{id}/results", get(results))
        .route("/jobs/{id}/export", get(export))
        .with_state(svc);
    match ui_dir {
        Some(dir) => api.nest_service("/ui", ServeDir::new(dir).append_index_html_on_directories(true)),
        None => api.route("/ui", get(placeholder_ui)).route("/ui/", get(placeholder_ui)),
    }
}

/// Serves until Ctrl-C, then writes snapshots.
pub async fn serve(svc: Arc<Service>, addr: SocketAddr, ui_dir: Option<PathBuf>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    let app = router(svc.clone(), ui_dir);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    svc.snapshot_all().map_err(std::io::Error::other)
}
