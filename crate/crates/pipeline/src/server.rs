//! HTTP front end and worker threads.

use std::collections::HashMap;
use std::io::Write;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use anyhow::{Context, Result};
use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde_json::json;
use talkmoves::analytics::{trends, AnalyticsConfig};
use talkmoves::ingest::TranscriptFormat;

use crate::config::ServiceConfig;
use crate::engine::Engine;
use crate::queue::{Queue, QueueError};
use crate::store::{JobState, Store, StoreError, FEEDBACK_FILE, JOB_FILE, REPORT_FILE};

type AppState = Arc<Queue>;

fn error(status: StatusCode, msg: impl Into<String>) -> Response {
    (status, Json(json!({ "error": msg.into() }))).into_response()
}

fn store_error(e: StoreError) -> Response {
    match e {
        StoreError::NotFound(id) => error(StatusCode::NOT_FOUND, format!("not found: {id}")),
        other => error(StatusCode::INTERNAL_SERVER_ERROR, other.to_string()),
    }
}

fn bytes_with_type(bytes: Vec<u8>, content_type: &'static str) -> Response {
    ([(header::CONTENT_TYPE, content_type)], bytes).into_response()
}

async fn health() -> Response {
    Json(json!({ "status": "ok", "version": env!("CARGO_PKG_VERSION") })).into_response()
}

async fn submit(State(q): State<AppState>, Query(params): Query<HashMap<String, String>>, body: Bytes) -> Response {
    let format = match params.get("format").map(|f| f.parse::<TranscriptFormat>()) {
        None => TranscriptFormat::Json,
        Some(Ok(f)) => f,
        Some(Err(e)) => return error(StatusCode::BAD_REQUEST, e.to_string()),
    };
    let lesson = params.get("lesson_id").map(String::as_str);
    let teacher = params.get("teacher").map(String::as_str);
    match q.enqueue(&body, format, lesson, teacher) {
        Ok(job) => (
            StatusCode::ACCEPTED,
            Json(json!({ "job_id": job.id, "state": job.state })),
        )
            .into_response(),
        Err(QueueError::MalformedInput(e)) => error(StatusCode::BAD_REQUEST, e.to_string()),
        Err(QueueError::Store(e)) => store_error(e),
    }
}

async fn list(State(q): State<AppState>) -> Response {
    match q.jobs() {
        Ok(jobs) => Json(jobs).into_response(),
        Err(e) => store_error(e),
    }
}

async fn status(State(q): State<AppState>, Path(id): Path<String>) -> Response {
    match q.store().read_artifact(&id, JOB_FILE) {
        Ok(bytes) => bytes_with_type(bytes, "application/json"),
        Err(e) => store_error(e),
    }
}

/// Serves a finished artifact, or 404 carrying the job state.
fn finished_artifact(q: &Queue, id: &str, file: &str, content_type: &'static str) -> Response {
    let job = match q.store().read_job(id) {
        Ok(job) => job,
        Err(e) => return store_error(e),
    };
    if job.state != JobState::Done {
        return (
            StatusCode::NOT_FOUND,
            Json(json!({ "state": job.state, "reason": job.reason })),
        )
            .into_response();
    }
    match q.store().read_artifact(id, file) {
        Ok(bytes) => bytes_with_type(bytes, content_type),
        Err(e) => store_error(e),
    }
}

async fn feedback(State(q): State<AppState>, Path(id): Path<String>) -> Response {
    finished_artifact(&q, &id, FEEDBACK_FILE, "application/json")
}

async fn report(State(q): State<AppState>, Path(id): Path<String>) -> Response {
    finished_artifact(&q, &id, REPORT_FILE, "text/html; charset=utf-8")
}

async fn teacher_trends(State(q): State<AppState>, Path(id): Path<String>) -> Response {
    match q.teacher_feedback(&id) {
        Ok(list) => Json(trends(&list)).into_response(),
        Err(e) => store_error(e),
    }
}

pub fn router(queue: Arc<Queue>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/lessons", post(submit).get(list))
        .route("/lessons/{id}/status", get(status))
        .route("/lessons/{id}/feedback", get(feedback))
        .route("/lessons/{id}/report", get(report))
        .route("/teachers/{id}/trends", get(teacher_trends))
        .with_state(queue)
}

/// Starts `workers` threads that drain the queue until `stop` is set.
pub fn spawn_workers(
    queue: Arc<Queue>,
    engine: Arc<Engine>,
    analytics: Arc<AnalyticsConfig>,
    cfg: &ServiceConfig,
    stop: Arc<AtomicBool>,
) -> Vec<thread::JoinHandle<()>> {
    let delay = Duration::from_millis(cfg.stage_delay_ms);
    let poll = Duration::from_millis(cfg.poll_ms);
    (0..cfg.workers)
        .map(|i| {
            let (queue, engine, analytics, stop) = (queue.clone(), engine.clone(), analytics.clone(), stop.clone());
            thread::Builder::new()
                .name(format!("worker-{i}"))
                .spawn(move || {
                    while !stop.load(Ordering::Relaxed) {
                        match queue.worker_step(&engine, &analytics, delay) {
                            Ok(Some(_)) => {}
                            Ok(None) => thread::sleep(poll),
                            Err(e) => {
                                eprintln!("worker-{i}: store error: {e}");
                                thread::sleep(poll);
                            }
                        }
                    }
                })
                .expect("spawn worker thread")
        })
        .collect()
}

/// Recovers the store, starts the workers and serves until interrupted.
pub fn serve(cfg: ServiceConfig) -> Result<()> {
    let store = Store::open(&cfg.store).with_context(|| format!("opening store {}", cfg.store.display()))?;
    let queue = Arc::new(Queue::new(store));
    let recovered = queue.recover()?;
    if recovered.requeued + recovered.corrupt + recovered.orphans_removed > 0 {
        eprintln!(
            "recovered store: {} requeued, {} corrupt, {} unfinished uploads removed",
            recovered.requeued, recovered.corrupt, recovered.orphans_removed
        );
    }
    let engine = Arc::new(Engine::load(cfg.classifier, cfg.model.as_deref(), &cfg.adapter)?);
    let analytics = Arc::new(cfg.analytics()?);

    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(&cfg.listen)
            .await
            .with_context(|| format!("binding {}", cfg.listen))?;
        let addr = listener.local_addr()?;
        let stop = Arc::new(AtomicBool::new(false));
        let workers = spawn_workers(queue.clone(), engine, analytics, &cfg, stop.clone());
        println!("listening on {addr}");
        std::io::stdout().flush()?;
        axum::serve(listener, router(queue))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        stop.store(true, Ordering::Relaxed);
        for w in workers {
            let _ = w.join();
        }
        Ok(())
    })
}
