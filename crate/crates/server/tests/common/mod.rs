#![allow(dead_code)]

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use kanbanx_server::{router, AppState, ServiceConfig};
use serde_json::{json, Value};
use tower::ServiceExt;

pub fn app() -> Router {
    router(AppState::new(ServiceConfig::default()))
}

pub async fn send(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    send_with(app, method, uri, body, &[]).await
}

pub async fn send_with(
    app: &Router,
    method: &str,
    uri: &str,
    body: Option<Value>,
    headers: &[(&str, &str)],
) -> (StatusCode, Value) {
    let mut req = Request::builder().method(method).uri(uri);
    for (k, v) in headers {
        req = req.header(*k, *v);
    }
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string()))
            .unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()))
    };
    (status, value)
}

/// Creates workspace `id` with the given shared limit.
pub async fn workspace(app: &Router, id: &str, limit: u32) {
    let (status, body) = send(
        app,
        "POST",
        "/api/workspaces",
        Some(json!({ "id": id, "name": id, "wip_policy": { "shared_limit": limit } })),
    )
    .await;
    assert_eq!(status, StatusCode::CREATED, "{body}");
}

pub async fn command(app: &Router, id: &str, cmd: Value) -> (StatusCode, Value) {
    send(app, "POST", &format!("/api/workspaces/{id}/commands"), Some(cmd)).await
}

pub async fn accept(app: &Router, id: &str, cmd: Value) -> Value {
    let (status, body) = command(app, id, cmd.clone()).await;
    assert_eq!(status, StatusCode::OK, "{cmd} -> {body}");
    body
}

pub fn task(title: &str) -> Value {
    json!({ "kind": "create_task", "title": title })
}
