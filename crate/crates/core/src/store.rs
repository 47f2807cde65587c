//! Append-only event persistence, snapshots and replay.
//!
//! On-disk layout of one workspace directory:
//!
//! ```text
//! <workspace>/workspace.json        genesis config (id, name, policies, columns)
//! <workspace>/events.log            one JSON event per line, seq 1, 2, 3, ...
//! <workspace>/snapshots/<seq>.snap  header line {"at_seq","checksum"} + canonical state
//! <workspace>/lock                  advisory lock held by writers
//! ```
//!
//! A snapshot's checksum is the SHA-256 of the state bytes that follow the
//! header, which are exactly [`Workspace::canonical_bytes`]. Loading verifies it.

use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::effect::{apply_event, ApplyError};
use crate::event::Event;
use crate::model::{ModelError, Workspace, WorkspaceConfig};

pub const GENESIS_FILE: &str = "workspace.json";
pub const EVENTS_FILE: &str = "events.log";
pub const SNAPSHOT_DIR: &str = "snapshots";
pub const LOCK_FILE: &str = "lock";
pub const EXPORT_FORMAT: &str = "kanbanx-export";
pub const EXPORT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("sequence gap: expected seq {expected}, found {found}")]
    SequenceGap { expected: u64, found: u64 },
    #[error("corrupt event at seq {seq}: {reason}")]
    CorruptEvent { seq: u64, reason: String },
    #[error("checksum mismatch in {0}")]
    ChecksumMismatch(PathBuf),
    #[error("workspace already exists at {0}")]
    AlreadyExists(PathBuf),
    #[error("no workspace at {0}")]
    NotFound(PathBuf),
    #[error("invalid genesis: {0}")]
    Genesis(#[from] ModelError),
    #[error("malformed {what}: {reason}")]
    Malformed { what: String, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn from_apply(seq: u64, e: ApplyError) -> StoreError {
    match e {
        ApplyError::SequenceGap { expected, found } => StoreError::SequenceGap { expected, found },
        ApplyError::Inconsistent(reason) => StoreError::CorruptEvent { seq, reason },
    }
}

/// Folds `events` onto `base`. Events must continue `base.clock` without gaps.
pub fn replay_onto(mut base: Workspace, events: &[Event]) -> Result<Workspace, StoreError> {
    for e in events {
        apply_event(&mut base, e).map_err(|err| from_apply(e.seq, err))?;
    }
    Ok(base)
}

/// Rebuilds a workspace from its genesis config and a log starting at seq 1.
pub fn replay(genesis: &WorkspaceConfig, events: &[Event]) -> Result<Workspace, StoreError> {
    replay_onto(Workspace::new(genesis)?, events)
}

/// In-memory append-only log enforcing contiguous sequence numbers.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EventLog {
    events: Vec<Event>,
}

impl EventLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_events(events: Vec<Event>) -> Result<Self, StoreError> {
        let mut log = Self::new();
        for e in events {
            log.append(e)?;
        }
        Ok(log)
    }

    pub fn last_seq(&self) -> u64 {
        self.events.last().map_or(0, |e| e.seq)
    }

    pub fn append(&mut self, event: Event) -> Result<(), StoreError> {
        let expected = self.last_seq() + 1;
        if event.seq != expected {
            return Err(StoreError::SequenceGap {
                expected,
                found: event.seq,
            });
        }
        self.events.push(event);
        Ok(())
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn since(&self, seq: u64) -> &[Event] {
        let start = (seq as usize).min(self.events.len());
        &self.events[start..]
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Snapshot {
    pub at_seq: u64,
    pub state: Workspace,
    pub checksum: String,
}

#[derive(Serialize, Deserialize)]
struct SnapshotHeader {
    at_seq: u64,
    checksum: String,
}

impl Snapshot {
    pub fn capture(ws: &Workspace) -> Self {
        Self {
            at_seq: ws.clock,
            state: ws.clone(),
            checksum: ws.checksum(),
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        let header = SnapshotHeader {
            at_seq: self.at_seq,
            checksum: self.checksum.clone(),
        };
        let mut out = serde_json::to_vec(&header).expect("header serializes");
        out.push(b'\n');
        out.extend(self.state.canonical_bytes());
        out
    }

    /// Parses and verifies a stored snapshot. Any integrity failure, including
    /// an unreadable header, is reported as a checksum mismatch for `path`.
    pub fn decode(bytes: &[u8], path: &Path) -> Result<Self, StoreError> {
        let mismatch = || StoreError::ChecksumMismatch(path.to_owned());
        let split = bytes.iter().position(|&b| b == b'\n').ok_or_else(mismatch)?;
        let header: SnapshotHeader = serde_json::from_slice(&bytes[..split]).map_err(|_| mismatch())?;
        let body = &bytes[split + 1..];
        if hex::encode(Sha256::digest(body)) != header.checksum {
            return Err(mismatch());
        }
        let state: Workspace = serde_json::from_slice(body).map_err(|_| mismatch())?;
        if state.clock != header.at_seq || state.checksum() != header.checksum {
            return Err(mismatch());
        }
        Ok(Self {
            at_seq: header.at_seq,
            state,
            checksum: header.checksum,
        })
    }
}

/// Everything stored for one workspace.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub genesis: WorkspaceConfig,
    pub events: Vec<Event>,
    pub snapshots: Vec<Snapshot>,
}

/// Reads a workspace directory, verifying every snapshot.
pub fn load(dir: &Path) -> Result<Loaded, StoreError> {
    let genesis = read_genesis(dir)?;
    let (events, _) = read_events(&dir.join(EVENTS_FILE))?;
    let mut snapshots = Vec::new();
    for (_, path) in snapshot_paths(dir)? {
        snapshots.push(Snapshot::decode(&fs::read(&path)?, &path)?);
    }
    Ok(Loaded {
        genesis,
        events,
        snapshots,
    })
}

fn read_genesis(dir: &Path) -> Result<WorkspaceConfig, StoreError> {
    let path = dir.join(GENESIS_FILE);
    let text = match fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == io::ErrorKind::NotFound => {
            return Err(StoreError::NotFound(dir.to_owned()))
        }
        Err(e) => return Err(e.into()),
    };
    serde_json::from_str(&text).map_err(|e| StoreError::Malformed {
        what: path.display().to_string(),
        reason: e.to_string(),
    })
}

/// Parses the log. A final line without a trailing newline is an interrupted
/// append: it is ignored, and its byte offset is returned so a writer can
/// truncate it away.
fn read_events(path: &Path) -> Result<(Vec<Event>, u64), StoreError> {
    let mut bytes = Vec::new();
    match File::open(path) {
        Ok(mut f) => {
            f.read_to_end(&mut bytes)?;
        }
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok((Vec::new(), 0)),
        Err(e) => return Err(e.into()),
    }
    let complete = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
    let mut log = EventLog::new();
    for line in BufReader::new(&bytes[..complete]).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let event: Event = serde_json::from_str(&line).map_err(|e| StoreError::CorruptEvent {
            seq: log.last_seq() + 1,
            reason: e.to_string(),
        })?;
        log.append(event)?;
    }
    Ok((log.events, complete as u64))
}

fn snapshot_paths(dir: &Path) -> Result<Vec<(u64, PathBuf)>, StoreError> {
    let snap_dir = dir.join(SNAPSHOT_DIR);
    let mut out = Vec::new();
    let entries = match fs::read_dir(&snap_dir) {
        Ok(e) => e,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(out),
        Err(e) => return Err(e.into()),
    };
    for entry in entries {
        let path = entry?.path();
        let seq = path
            .file_name()
            .and_then(|n| n.to_str())
            .and_then(|n| n.strip_suffix(".snap"))
            .and_then(|n| n.parse::<u64>().ok());
        if let Some(seq) = seq {
            out.push((seq, path));
        }
    }
    out.sort();
    Ok(out)
}

/// A workspace directory opened for appending.
#[derive(Debug)]
pub struct FileStore {
    dir: PathBuf,
    genesis: WorkspaceConfig,
    log: EventLog,
    file: File,
}

impl FileStore {
    /// Creates a new workspace directory. Fails if one already exists there.
    pub fn create(dir: impl Into<PathBuf>, genesis: WorkspaceConfig) -> Result<Self, StoreError> {
        let dir = dir.into();
        Workspace::new(&genesis)?;
        if dir.join(GENESIS_FILE).exists() {
            return Err(StoreError::AlreadyExists(dir));
        }
        fs::create_dir_all(dir.join(SNAPSHOT_DIR))?;
        let tmp = dir.join(format!("{GENESIS_FILE}.tmp"));
        fs::write(&tmp, serde_json::to_vec_pretty(&genesis).expect("config serializes"))?;
        File::open(&tmp)?.sync_all()?;
        fs::rename(&tmp, dir.join(GENESIS_FILE))?;
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(dir.join(EVENTS_FILE))?;
        Ok(Self {
            dir,
            genesis,
            log: EventLog::new(),
            file,
        })
    }

    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let dir = dir.into();
        let genesis = read_genesis(&dir)?;
        let path = dir.join(EVENTS_FILE);
        let (events, complete) = read_events(&path)?;
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        if file.metadata()?.len() > complete {
            file.set_len(complete)?;
        }
        Ok(Self {
            dir,
            genesis,
            log: EventLog { events },
            file,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn genesis(&self) -> &WorkspaceConfig {
        &self.genesis
    }

    pub fn events(&self) -> &[Event] {
        self.log.events()
    }

    pub fn last_seq(&self) -> u64 {
        self.log.last_seq()
    }

    /// Appends one event; it is on disk before this returns.
    pub fn append(&mut self, event: Event) -> Result<(), StoreError> {
        let expected = self.log.last_seq() + 1;
        if event.seq != expected {
            return Err(StoreError::SequenceGap {
                expected,
                found: event.seq,
            });
        }
        let mut line = serde_json::to_vec(&event).expect("event serializes");
        line.push(b'\n');
        self.file.write_all(&line)?;
        self.file.sync_data()?;
        self.log.append(event)
    }

    pub fn write_snapshot(&self, ws: &Workspace) -> Result<Snapshot, StoreError> {
        let snap = Snapshot::capture(ws);
        let dir = self.dir.join(SNAPSHOT_DIR);
        fs::create_dir_all(&dir)?;
        let tmp = dir.join(format!("{}.snap.tmp", snap.at_seq));
        fs::write(&tmp, snap.encode())?;
        File::open(&tmp)?.sync_all()?;
        fs::rename(&tmp, dir.join(format!("{}.snap", snap.at_seq)))?;
        Ok(snap)
    }

    /// Latest snapshot at or below the log head, verified.
    pub fn latest_snapshot(&self) -> Result<Option<Snapshot>, StoreError> {
        let head = self.last_seq();
        let Some((_, path)) = snapshot_paths(&self.dir)?
            .into_iter()
            .rfind(|(seq, _)| *seq <= head)
        else {
            return Ok(None);
        };
        Snapshot::decode(&fs::read(&path)?, &path).map(Some)
    }

    /// Current state: latest snapshot plus the suffix of the log after it.
    pub fn workspace(&self) -> Result<Workspace, StoreError> {
        match self.latest_snapshot()? {
            Some(snap) => {
                let at = snap.at_seq;
                replay_onto(snap.state, self.log.since(at))
            }
            None => replay(&self.genesis, self.log.events()),
        }
    }
}

/// Exclusive advisory lock on a workspace directory, released on drop.
#[derive(Debug)]
pub struct WorkspaceLock {
    file: File,
}

impl WorkspaceLock {
    pub fn acquire(dir: &Path) -> Result<Self, StoreError> {
        fs::create_dir_all(dir)?;
        let file = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(dir.join(LOCK_FILE))?;
        file.lock()?;
        Ok(Self { file })
    }
}

impl Drop for WorkspaceLock {
    fn drop(&mut self) {
        let _ = self.file.unlock();
    }
}

#[derive(Serialize, Deserialize)]
struct ExportHeader {
    format: String,
    version: u32,
    genesis: WorkspaceConfig,
}

/// Writes the portable export stream: a header line carrying the genesis
/// config, then the events exactly as they appear in `events.log`.
pub fn export<W: Write>(genesis: &WorkspaceConfig, events: &[Event], mut out: W) -> io::Result<()> {
    let header = ExportHeader {
        format: EXPORT_FORMAT.to_owned(),
        version: EXPORT_VERSION,
        genesis: genesis.clone(),
    };
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;
    for e in events {
        serde_json::to_writer(&mut out, e)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

/// Parses an export stream and verifies that it replays cleanly.
pub fn read_export<R: BufRead>(input: R) -> Result<(WorkspaceConfig, Vec<Event>), StoreError> {
    let mut lines = input.lines();
    let malformed = |reason: String| StoreError::Malformed {
        what: "export header".into(),
        reason,
    };
    let first = lines
        .next()
        .ok_or_else(|| malformed("empty input".into()))??;
    let header: ExportHeader = serde_json::from_str(&first).map_err(|e| malformed(e.to_string()))?;
    if header.format != EXPORT_FORMAT || header.version != EXPORT_VERSION {
        return Err(malformed(format!(
            "unsupported format {} v{}",
            header.format, header.version
        )));
    }
    let mut log = EventLog::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let event: Event = serde_json::from_str(&line).map_err(|e| StoreError::CorruptEvent {
            seq: log.last_seq() + 1,
            reason: e.to_string(),
        })?;
        log.append(event)?;
    }
    replay(&header.genesis, log.events())?;
    Ok((header.genesis, log.events))
}

/// Creates a workspace directory from an export stream; returns the store
/// and the rebuilt workspace.
pub fn import<R: BufRead>(dir: impl Into<PathBuf>, input: R) -> Result<(FileStore, Workspace), StoreError> {
    let (genesis, events) = read_export(input)?;
    let ws = replay(&genesis, &events)?;
    let mut store = FileStore::create(dir, genesis)?;
    for e in events {
        store.append(e)?;
    }
    Ok((store, ws))
}
