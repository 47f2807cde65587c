//! Kanban workflow engine with parallel focus boards.
//!
//! A workspace holds one development board and any number of focus boards
//! stacked beside it. Focus work items (X-Tags) are extracted from
//! development tasks and linked back to them with X-Marks; each X-Tag cites at
//! least one of its focus's principles. Starting a task starts its pending
//! X-Tags under one shared WIP limit, and finishing an X-Tag feeds change tasks
//! into the front of the development backlog.
//!
//! State is event-sourced: [`engine::execute`] turns a [`Command`] into one
//! [`Event`], and [`store::replay`] folds a log back into a [`Workspace`].

pub mod command;
pub mod effect;
pub mod engine;
pub mod event;
pub mod ids;
pub mod metrics;
pub mod model;
pub mod presets;
pub mod store;
pub mod trace;
pub mod validate;

pub use command::{ChangeSpec, Command};
pub use effect::Effect;
pub use engine::{decide, execute, transition, Rejection, Rule, TransitionResult};
pub use event::Event;
pub use ids::{BoardId, CardId, FocusId, PrincipleId, WorkspaceId};
pub use metrics::{coverage_ratio, flow_metrics, FlowMetrics, QueryError};
pub use model::{
    new_workspace, Board, Card, CardKind, Column, ColumnSpec, CompletionPolicy, FocusBoard,
    ModelError, Principle, PrincipleLink, Stage, WipPolicy, Workspace, WorkspaceConfig, XMark,
};
pub use presets::{apply_preset, list_presets, load_preset, FocusTemplate, PresetError};
pub use store::{replay, replay_onto, EventLog, FileStore, Snapshot, StoreError};
pub use trace::{principle_usage, trace, TraceGraph};
pub use validate::{validate, ValidationReport};
