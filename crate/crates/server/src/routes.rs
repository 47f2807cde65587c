use std::collections::BTreeMap;
use std::convert::Infallible;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::sse::{Event as SseEvent, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::stream::{self, Stream, StreamExt};
use kanbanx_core::metrics::flow_metrics;
use kanbanx_core::model::{slug, ColumnSpec};
use kanbanx_core::{
    coverage_ratio, list_presets, load_preset, principle_usage, trace, CardId, Command,
    CompletionPolicy, Event, PrincipleId, WipPolicy, WorkspaceConfig,
};
use serde::Deserialize;
use serde_json::{json, Value};
use tokio::sync::broadcast::error::RecvError;

use crate::error::ApiError;
use crate::state::AppState;

pub const IDEMPOTENCY_HEADER: &str = "idempotency-key";

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/workspaces", post(create_workspace).get(list_workspaces))
        .route("/api/workspaces/{id}", get(get_workspace))
        .route("/api/workspaces/{id}/commands", post(submit_command))
        .route("/api/workspaces/{id}/events", get(events))
        .route("/api/workspaces/{id}/metrics/coverage", get(coverage))
        .route("/api/workspaces/{id}/metrics/flow", get(flow))
        .route("/api/workspaces/{id}/trace/{card}", get(trace_card))
        .route("/api/workspaces/{id}/principles/{principle}/usage", get(usage))
        .route("/api/presets", get(presets))
        .route("/api/presets/{name}", get(preset))
        .with_state(state)
}

fn malformed(e: impl std::fmt::Display) -> ApiError {
    ApiError::bad_request("MalformedRequest", e.to_string())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateWorkspace {
    pub id: Option<String>,
    pub name: String,
    pub wip_policy: WipPolicy,
    #[serde(default)]
    pub completion_policy: CompletionPolicy,
    pub dev_columns: Option<Vec<ColumnSpec>>,
}

async fn create_workspace(
    State(state): State<AppState>,
    body: Result<Json<CreateWorkspace>, JsonRejection>,
) -> Result<Response, ApiError> {
    let Json(body) = body.map_err(malformed)?;
    let id = match body.id {
        Some(id) if id.is_empty() || slug(&id) != id => {
            return Err(ApiError::bad_request(
                "InvalidConfig",
                format!("workspace id {id:?} must be lowercase letters, digits and dashes"),
            ))
        }
        Some(id) => id,
        None => slug(&body.name),
    };
    let config = WorkspaceConfig {
        id: id.as_str().into(),
        name: body.name,
        wip_policy: body.wip_policy,
        completion_policy: body.completion_policy,
        dev_columns: body.dev_columns,
    };
    state.create(config).await?;
    Ok((StatusCode::CREATED, Json(json!({ "id": id }))).into_response())
}

async fn list_workspaces(State(state): State<AppState>) -> Json<Value> {
    let items: Vec<Value> = state
        .ids()
        .into_iter()
        .filter_map(|id| state.get(id.as_str()).ok())
        .map(|h| {
            let ws = h.snapshot();
            json!({ "id": ws.id, "name": ws.name, "clock": ws.clock })
        })
        .collect();
    Json(json!({ "workspaces": items }))
}

async fn get_workspace(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let ws = state.get(&id)?.snapshot();
    let mut body = serde_json::to_value(&*ws).expect("workspace serializes");
    body["checksum"] = Value::String(ws.checksum());
    Ok(Json(body))
}

async fn submit_command(
    State(state): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Result<Json<Command>, JsonRejection>,
) -> Result<Response, ApiError> {
    let handle = state.get(&id)?;
    let Json(cmd) = body.map_err(malformed)?;
    let key = match headers.get(IDEMPOTENCY_HEADER) {
        Some(v) => Some(
            v.to_str()
                .map_err(|_| ApiError::bad_request("MalformedRequest", "idempotency key must be visible ASCII"))?
                .to_owned(),
        ),
        None => None,
    };
    let reply = handle.submit(cmd, key).await?;
    Ok((reply.status, Json(reply.body)).into_response())
}

#[derive(Debug, Deserialize)]
struct SinceQuery {
    #[serde(default)]
    since: u64,
}

async fn events(
    State(state): State<AppState>,
    Path(id): Path<String>,
    query: Result<Query<SinceQuery>, QueryRejection>,
) -> Result<Sse<impl Stream<Item = Result<SseEvent, Infallible>>>, ApiError> {
    let handle = state.get(&id)?;
    let Query(SinceQuery { since }) = query.map_err(|e| ApiError::bad_request("InvalidSince", e.body_text()))?;
    // Subscribe before reading the backlog so nothing falls between the two.
    let rx = handle.subscribe();
    let backlog = handle.events_since(since);
    let last = backlog.last().map_or(since, |e| e.seq);
    let live = stream::unfold((rx, last), |(mut rx, last)| async move {
        loop {
            match rx.recv().await {
                Ok(e) if e.seq <= last => continue,
                Ok(e) => {
                    let seq = e.seq;
                    return Some((e, (rx, seq)));
                }
                // A lagging client resumes with `since`.
                Err(RecvError::Lagged(_)) | Err(RecvError::Closed) => return None,
            }
        }
    });
    let stream = stream::iter(backlog).chain(live).map(|e| Ok(sse_event(&e)));
    Ok(Sse::new(stream).keep_alive(KeepAlive::default()))
}

fn sse_event(e: &Event) -> SseEvent {
    SseEvent::default()
        .id(e.seq.to_string())
        .event(e.kind())
        .data(serde_json::to_string(e).expect("event serializes"))
}

#[derive(Debug, Deserialize)]
struct CoverageQuery {
    focus: Option<String>,
}

async fn coverage(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<CoverageQuery>,
) -> Result<Json<Value>, ApiError> {
    let ws = state.get(&id)?.snapshot();
    match q.focus {
        Some(name) => {
            let focus = ws
                .resolve_focus(&name)
                .ok_or_else(|| ApiError::not_found("UnknownFocus", format!("no focus {name}")))?;
            let ratio = coverage_ratio(&ws, focus.id())?;
            Ok(Json(json!({ "focus": focus.id(), "coverage": ratio })))
        }
        None => {
            let mut all = BTreeMap::new();
            for f in &ws.focus_boards {
                all.insert(f.id().to_string(), coverage_ratio(&ws, f.id())?);
            }
            Ok(Json(json!({ "coverage": all })))
        }
    }
}

#[derive(Debug, Deserialize)]
struct FlowQuery {
    window: Option<u64>,
}

async fn flow(
    State(state): State<AppState>,
    Path(id): Path<String>,
    query: Result<Query<FlowQuery>, QueryRejection>,
) -> Result<Json<Value>, ApiError> {
    let handle = state.get(&id)?;
    let Query(q) = query.map_err(|e| ApiError::bad_request("InvalidWindow", e.body_text()))?;
    let events = handle.events_since(0);
    let metrics = flow_metrics(handle.genesis(), &events, q.window.unwrap_or(10))?;
    Ok(Json(serde_json::to_value(metrics).expect("metrics serialize")))
}

async fn trace_card(
    State(state): State<AppState>,
    Path((id, card)): Path<(String, String)>,
) -> Result<Json<Value>, ApiError> {
    let ws = state.get(&id)?.snapshot();
    let graph = trace(&ws, &CardId::new(card))?;
    Ok(Json(serde_json::to_value(graph).expect("graph serializes")))
}

async fn usage(
    State(state): State<AppState>,
    Path((id, principle)): Path<(String, String)>,
) -> Result<Json<Value>, ApiError> {
    let ws = state.get(&id)?.snapshot();
    let pid = PrincipleId::new(principle);
    let usage = principle_usage(&ws, &pid)?;
    Ok(Json(json!({ "principle": pid, "usage": usage })))
}

async fn presets() -> Json<Value> {
    Json(json!({ "presets": list_presets() }))
}

async fn preset(Path(name): Path<String>) -> Result<Json<Value>, ApiError> {
    let t = load_preset(&name).map_err(|e| ApiError::not_found("UnknownPreset", e.to_string()))?;
    Ok(Json(serde_json::to_value(t).expect("preset serializes")))
}
