//! HTTP front end for the workflow engine.
//!
//! Every workspace has one writer queue; reads are served from the last
//! published snapshot. Events stream to clients as server-sent events.

pub mod error;
pub mod routes;
pub mod state;

pub use error::{ApiError, ErrorBody};
pub use routes::{router, CreateWorkspace, IDEMPOTENCY_HEADER};
pub use state::{AppState, ServiceConfig, WorkspaceHandle};
