use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use kanbanx_core::{QueryError, Rejection, StoreError};
use serde::{Deserialize, Serialize};

/// Error body returned by every route: `{"rule": ..., "message": ...}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub rule: String,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    pub fn new(status: StatusCode, rule: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            status,
            body: ErrorBody {
                rule: rule.into(),
                message: message.into(),
            },
        }
    }

    pub fn bad_request(rule: &str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, rule, message)
    }

    pub fn not_found(rule: &str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, rule, message)
    }

    pub fn unknown_workspace(id: &str) -> Self {
        Self::not_found("UnknownWorkspace", format!("no workspace {id}"))
    }
}

impl From<Rejection> for ApiError {
    fn from(r: Rejection) -> Self {
        Self::new(StatusCode::CONFLICT, r.rule.as_str(), r.message)
    }
}

impl From<QueryError> for ApiError {
    fn from(e: QueryError) -> Self {
        let message = e.to_string();
        match e {
            QueryError::UnknownFocus(_) => Self::not_found("UnknownFocus", message),
            QueryError::UnknownCard(_) => Self::not_found("UnknownCard", message),
            QueryError::UnknownPrinciple(_) => Self::not_found("UnknownPrinciple", message),
            QueryError::InvalidWindow => Self::bad_request("InvalidWindow", message),
            QueryError::Store(e) => e.into(),
        }
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "StoreFailure", e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}
