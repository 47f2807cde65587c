use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::http::StatusCode;
use kanbanx_core::{execute, Command, Event, FileStore, Workspace, WorkspaceConfig, WorkspaceId};
use serde_json::Value;
use tokio::sync::{broadcast, Mutex};

use crate::error::ApiError;

#[derive(Clone, Debug)]
pub struct ServiceConfig {
    /// Persist workspaces here; in-memory only when unset.
    pub data_dir: Option<PathBuf>,
    /// Write a snapshot after this many events (0 disables snapshots).
    pub snapshot_every: u64,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            data_dir: None,
            snapshot_every: 100,
        }
    }
}

/// A command response as sent to the client; cached per idempotency key.
#[derive(Clone, Debug)]
pub struct Reply {
    pub status: StatusCode,
    pub body: Value,
}

struct Writer {
    ws: Workspace,
    store: Option<FileStore>,
    replies: HashMap<String, Reply>,
}

/// One live workspace. Commands queue on `writer`; readers use the published
/// snapshot and event list and never wait for a command to finish.
pub struct WorkspaceHandle {
    genesis: Workspace,
    current: RwLock<Arc<Workspace>>,
    events: RwLock<Vec<Event>>,
    writer: Mutex<Writer>,
    tx: broadcast::Sender<Event>,
    snapshot_every: u64,
}

impl WorkspaceHandle {
    fn new(genesis: Workspace, ws: Workspace, events: Vec<Event>, store: Option<FileStore>, snapshot_every: u64) -> Self {
        let (tx, _) = broadcast::channel(1024);
        Self {
            genesis,
            current: RwLock::new(Arc::new(ws.clone())),
            events: RwLock::new(events),
            writer: Mutex::new(Writer {
                ws,
                store,
                replies: HashMap::new(),
            }),
            tx,
            snapshot_every,
        }
    }

    pub fn snapshot(&self) -> Arc<Workspace> {
        self.current.read().expect("snapshot lock").clone()
    }

    pub fn genesis(&self) -> &Workspace {
        &self.genesis
    }

    pub fn events_since(&self, since: u64) -> Vec<Event> {
        let events = self.events.read().expect("event lock");
        events.iter().filter(|e| e.seq > since).cloned().collect()
    }

    pub fn subscribe(&self) -> broadcast::Receiver<Event> {
        self.tx.subscribe()
    }

    /// Applies one command. Writers are served in arrival order.
    pub async fn submit(&self, cmd: Command, key: Option<String>) -> Result<Reply, ApiError> {
        let mut writer = self.writer.lock().await;
        if let Some(reply) = key.as_ref().and_then(|k| writer.replies.get(k)) {
            return Ok(reply.clone());
        }
        let mut next = writer.ws.clone();
        let wall = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true);
        let result = execute(&mut next, &cmd, Some(wall));
        let reply = match &result.rejection {
            Some(rejection) => Reply {
                status: StatusCode::CONFLICT,
                body: serde_json::to_value(ApiError::from(rejection.clone()).body).expect("serializable"),
            },
            None => {
                if let Some(store) = writer.store.as_mut() {
                    for e in &result.events {
                        store.append(e.clone())?;
                    }
                    if self.snapshot_every > 0 && next.clock % self.snapshot_every == 0 {
                        store.write_snapshot(&next)?;
                    }
                }
                writer.ws = next.clone();
                *self.current.write().expect("snapshot lock") = Arc::new(next);
                self.events
                    .write()
                    .expect("event lock")
                    .extend(result.events.iter().cloned());
                for e in &result.events {
                    // No subscribers is fine.
                    let _ = self.tx.send(e.clone());
                }
                tracing::debug!(kind = cmd.kind(), seq = writer.ws.clock, "command accepted");
                Reply {
                    status: StatusCode::OK,
                    body: serde_json::to_value(&result).expect("serializable"),
                }
            }
        };
        if let Some(k) = key {
            writer.replies.insert(k, reply.clone());
        }
        Ok(reply)
    }
}

#[derive(Clone)]
pub struct AppState {
    inner: Arc<Registry>,
}

struct Registry {
    config: ServiceConfig,
    workspaces: RwLock<BTreeMap<WorkspaceId, Arc<WorkspaceHandle>>>,
    create: Mutex<()>,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Self {
        Self {
            inner: Arc::new(Registry {
                config,
                workspaces: RwLock::new(BTreeMap::new()),
                create: Mutex::new(()),
            }),
        }
    }

    /// Opens every workspace found under the data directory.
    pub fn load(config: ServiceConfig) -> Result<Self, ApiError> {
        let state = Self::new(config);
        let Some(dir) = state.inner.config.data_dir.clone() else {
            return Ok(state);
        };
        std::fs::create_dir_all(&dir).map_err(kanbanx_core::StoreError::from)?;
        let entries = std::fs::read_dir(&dir).map_err(kanbanx_core::StoreError::from)?;
        for entry in entries {
            let path = entry.map_err(kanbanx_core::StoreError::from)?.path();
            if !path.join(kanbanx_core::store::GENESIS_FILE).is_file() {
                continue;
            }
            let store = FileStore::open(&path)?;
            let ws = store.workspace()?;
            let genesis = Workspace::new(store.genesis()).map_err(kanbanx_core::StoreError::from)?;
            let events = store.events().to_vec();
            tracing::info!(workspace = %ws.id, clock = ws.clock, "loaded workspace");
            let handle = WorkspaceHandle::new(genesis, ws.clone(), events, Some(store), state.inner.config.snapshot_every);
            state
                .inner
                .workspaces
                .write()
                .expect("registry lock")
                .insert(ws.id.clone(), Arc::new(handle));
        }
        Ok(state)
    }

    pub fn get(&self, id: &str) -> Result<Arc<WorkspaceHandle>, ApiError> {
        self.inner
            .workspaces
            .read()
            .expect("registry lock")
            .get(&WorkspaceId::new(id))
            .cloned()
            .ok_or_else(|| ApiError::unknown_workspace(id))
    }

    pub fn ids(&self) -> Vec<WorkspaceId> {
        self.inner.workspaces.read().expect("registry lock").keys().cloned().collect()
    }

    pub async fn create(&self, config: WorkspaceConfig) -> Result<Arc<WorkspaceHandle>, ApiError> {
        let _guard = self.inner.create.lock().await;
        if self.get(config.id.as_str()).is_ok() {
            return Err(ApiError::new(
                StatusCode::CONFLICT,
                "DuplicateWorkspace",
                format!("workspace {} already exists", config.id),
            ));
        }
        let ws = Workspace::new(&config).map_err(|e| ApiError::bad_request("InvalidConfig", e.to_string()))?;
        let store = match &self.inner.config.data_dir {
            Some(dir) => Some(FileStore::create(dir.join(config.id.as_str()), config.clone())?),
            None => None,
        };
        let handle = Arc::new(WorkspaceHandle::new(ws.clone(), ws, Vec::new(), store, self.inner.config.snapshot_every));
        self.inner
            .workspaces
            .write()
            .expect("registry lock")
            .insert(config.id.clone(), handle.clone());
        tracing::info!(workspace = %config.id, "created workspace");
        Ok(handle)
    }
}
