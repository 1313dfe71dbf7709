use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use tasklearn_server::{default_factory, router, SessionHost};

fn app() -> axum::Router {
    router(Arc::new(SessionHost::in_memory(default_factory())))
}

async fn call(app: &axum::Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header("content-type", "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap()
    };
    (status, value)
}

async fn create(app: &axum::Router) -> String {
    let (status, body) = call(app, "POST", "/sessions", Some(json!({}))).await;
    assert_eq!(status, StatusCode::CREATED);
    body["id"].as_str().unwrap().to_string()
}

#[tokio::test]
async fn status_codes() {
    let app = app();
    let id = create(&app).await;
    let (s, _) = call(&app, "GET", "/sessions/missing/state", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (s, _) = call(&app, "POST", "/sessions", Some(json!({"backend": "nope"}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (s, _) = call(&app, "POST", &format!("/sessions/{id}/message"), Some(json!({"text": "press space"}))).await;
    assert_eq!(s, StatusCode::ACCEPTED);
    let (s, _) = call(&app, "POST", &format!("/sessions/{id}/message"), Some(json!({"text": "hi"}))).await;
    assert_eq!(s, StatusCode::CONFLICT);
    let (s, body) = call(&app, "GET", &format!("/sessions/{id}/state"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(body["pending"]["kind"], "segmentation");
    let (s, _) = call(&app, "POST", &format!("/sessions/{id}/confirm"), Some(json!({"verdict": "approve"}))).await;
    assert_eq!(s, StatusCode::ACCEPTED);
    let (s, _) = call(&app, "POST", &format!("/sessions/{id}/undo"), None).await;
    assert_eq!(s, StatusCode::ACCEPTED);
    let (s, body) = call(&app, "GET", &format!("/sessions/{id}/metrics"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(body["undos"], 1);
    assert_eq!(body["segment"]["approved"], 1);
    let (s, body) = call(&app, "GET", &format!("/sessions/{id}/record"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(body["backend"], "mock");
}

/// Reads SSE frames until `n` events have arrived.
async fn read_events(body: Body, n: usize) -> Vec<Value> {
    let mut body = body;
    let mut buf = String::new();
    let mut out = Vec::new();
    while out.len() < n {
        let frame = tokio::time::timeout(std::time::Duration::from_secs(5), body.frame())
            .await
            .expect("stream stalled")
            .expect("stream ended")
            .unwrap();
        if let Ok(data) = frame.into_data() {
            buf.push_str(std::str::from_utf8(&data).unwrap());
        }
        while let Some(end) = buf.find("\n\n") {
            let chunk: String = buf.drain(..end + 2).collect();
            for line in chunk.lines() {
                if let Some(data) = line.strip_prefix("data: ") {
                    out.push(serde_json::from_str(data).unwrap());
                }
            }
        }
    }
    out
}

#[tokio::test]
async fn event_stream_replays_gap_then_goes_live() {
    let app = app();
    let id = create(&app).await;
    call(&app, "POST", &format!("/sessions/{id}/message"), Some(json!({"text": "press space"}))).await;
    let (_, state) = call(&app, "GET", &format!("/sessions/{id}/state"), None).await;
    let last = state["last_seq"].as_u64().unwrap();

    let req = Request::get(format!("/sessions/{id}/events?since=1")).body(Body::empty()).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    assert_eq!(resp.status(), StatusCode::OK);
    let body = resp.into_body();

    let (_, posted) = call(&app, "POST", &format!("/sessions/{id}/confirm"), Some(json!({"verdict": "approve"}))).await;
    let live = posted["events"].as_array().unwrap().len();
    let events = read_events(body, (last - 1) as usize + live).await;
    let seqs: Vec<u64> = events.iter().map(|e| e["seq"].as_u64().unwrap()).collect();
    let expected: Vec<u64> = (2..=last + live as u64).collect();
    assert_eq!(seqs, expected);
}
