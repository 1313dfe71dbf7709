//! HTTP routes and the server-sent event stream.

use std::convert::Infallible;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::stream::{self, Stream, StreamExt};
use serde::Deserialize;
use serde_json::json;
use tokio::sync::broadcast::error::RecvError;

use tasklearn::dialog::{Input, Verdict};

use crate::host::{CreateRequest, HostError, SessionHost};

type Shared = Arc<SessionHost>;

impl IntoResponse for HostError {
    fn into_response(self) -> Response {
        let status = match &self {
            HostError::UnknownSession(_) => StatusCode::NOT_FOUND,
            HostError::BadConfig(_) => StatusCode::BAD_REQUEST,
            HostError::WrongMode(_) | HostError::Busy => StatusCode::CONFLICT,
            HostError::Storage(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(json!({"error": self.to_string()}))).into_response()
    }
}

pub fn router(host: Shared) -> Router {
    Router::new()
        .route("/sessions", post(create).get(list))
        .route("/sessions/{id}/message", post(message))
        .route("/sessions/{id}/confirm", post(confirm))
        .route("/sessions/{id}/undo", post(undo))
        .route("/sessions/{id}/state", get(state))
        .route("/sessions/{id}/metrics", get(metrics))
        .route("/sessions/{id}/record", get(record))
        .route("/sessions/{id}/events", get(events))
        .with_state(host)
}

/// Runs blocking host work (session locks, model calls) off the async
/// workers.
async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, HostError> + Send + 'static,
) -> Result<T, HostError> {
    tokio::task::spawn_blocking(f)
        .await
        .unwrap_or_else(|e| Err(HostError::Storage(format!("worker failed: {e}"))))
}

async fn create(
    State(host): State<Shared>,
    body: Option<Json<CreateRequest>>,
) -> Result<impl IntoResponse, HostError> {
    let request = body.map(|Json(r)| r).unwrap_or_default();
    let id = blocking(move || host.create(request)).await?;
    Ok((StatusCode::CREATED, Json(json!({"id": id}))))
}

async fn list(State(host): State<Shared>) -> Json<Vec<String>> {
    Json(host.ids())
}

#[derive(Deserialize)]
struct MessageBody {
    text: String,
}

#[derive(Deserialize)]
#[serde(rename_all = "snake_case")]
enum VerdictKind {
    Approve,
    Correct,
}

#[derive(Deserialize)]
struct ConfirmBody {
    verdict: VerdictKind,
    #[serde(default)]
    correction: Option<String>,
}

async fn submit(host: Shared, id: String, input: Input) -> Result<impl IntoResponse, HostError> {
    let events = blocking(move || host.submit(&id, input)).await?;
    Ok((StatusCode::ACCEPTED, Json(json!({"events": events}))))
}

async fn message(
    State(host): State<Shared>,
    Path(id): Path<String>,
    Json(body): Json<MessageBody>,
) -> Result<impl IntoResponse, HostError> {
    submit(host, id, Input::Say { text: body.text }).await
}

async fn confirm(
    State(host): State<Shared>,
    Path(id): Path<String>,
    Json(body): Json<ConfirmBody>,
) -> Result<impl IntoResponse, HostError> {
    let verdict = match body.verdict {
        VerdictKind::Approve => Verdict::Approve,
        VerdictKind::Correct => Verdict::Correct(body.correction.unwrap_or_default()),
    };
    submit(host, id, Input::Confirm { verdict }).await
}

async fn undo(
    State(host): State<Shared>,
    Path(id): Path<String>,
) -> Result<impl IntoResponse, HostError> {
    submit(host, id, Input::Undo).await
}

async fn state(State(host): State<Shared>, Path(id): Path<String>) -> Result<impl IntoResponse, HostError> {
    Ok(Json(blocking(move || host.state(&id)).await?))
}

async fn metrics(State(host): State<Shared>, Path(id): Path<String>) -> Result<impl IntoResponse, HostError> {
    Ok(Json(blocking(move || host.metrics(&id)).await?))
}

async fn record(State(host): State<Shared>, Path(id): Path<String>) -> Result<impl IntoResponse, HostError> {
    Ok(Json(blocking(move || host.record(&id)).await?))
}

#[derive(Deserialize)]
struct Since {
    #[serde(default)]
    since: u64,
}

async fn events(
    State(host): State<Shared>,
    Path(id): Path<String>,
    Query(Since { since }): Query<Since>,
) -> Result<Sse<impl Stream<Item = Result<Event, Infallible>>>, HostError> {
    let (backlog, rx) = blocking(move || host.subscribe(&id, since)).await?;
    let last = backlog.last().map_or(since, |e| e.seq);
    let to_sse = |e: &tasklearn::dialog::LoggedEvent| {
        Event::default()
            .id(e.seq.to_string())
            .json_data(e)
            .expect("events serialize")
    };
    let backlog = stream::iter(backlog.iter().map(to_sse).map(Ok).collect::<Vec<_>>());
    let live = stream::unfold((rx, last), move |(mut rx, last)| async move {
        loop {
            match rx.recv().await {
                Ok(e) if e.seq <= last => continue,
                Ok(e) => {
                    let seq = e.seq;
                    return Some((Ok(to_sse(&e)), (rx, seq)));
                }
                Err(RecvError::Lagged(n)) => {
                    // the client reconnects with its last id to fill the gap
                    log::warn!("event subscriber lagged by {n}; closing stream");
                    return None;
                }
                Err(RecvError::Closed) => return None,
            }
        }
    });
    Ok(Sse::new(backlog.chain(live)).keep_alive(KeepAlive::default()))
}

/// Serves on `addr` until the process is stopped.
pub async fn serve(host: Shared, addr: std::net::SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(host)).await
}
