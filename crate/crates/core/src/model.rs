//! Workspace data model: boards, columns, cards, marks, principles and policies.
//!
//! A [`Workspace`] is a plain value. All mutation goes through the rules engine
//! ([`crate::engine`]) which produces effects, and effects are applied by
//! [`crate::effect`]. Nothing in this module enforces workflow rules; structural
//! validity is checked by [`crate::validate`].

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::ids::{BoardId, CardId, FocusId, PrincipleId, WorkspaceId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),
    #[error("invalid columns: {0}")]
    InvalidColumns(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Queue,
    Active,
    Done,
}

impl Stage {
    pub const ALL: [Stage; 3] = [Stage::Queue, Stage::Active, Stage::Done];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Queue => "queue",
            Stage::Active => "active",
            Stage::Done => "done",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CardKind {
    Task,
    Xtag,
    ChangeTask,
}

impl CardKind {
    /// Development-board kinds: tasks and change tasks.
    pub fn is_dev(self) -> bool {
        !matches!(self, CardKind::Xtag)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CardKind::Task => "task",
            CardKind::Xtag => "xtag",
            CardKind::ChangeTask => "change_task",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompletionPolicy {
    /// Completing a development card is rejected while a linked X-Tag is unfinished.
    #[default]
    Strict,
    /// Completion is accepted with a warning naming the unfinished X-Tags.
    Warn,
}

impl CompletionPolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            CompletionPolicy::Strict => "strict",
            CompletionPolicy::Warn => "warn",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WipPolicy {
    /// Maximum number of cards in active columns summed over every board.
    pub shared_limit: u32,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub per_board_limits: BTreeMap<BoardId, u32>,
}

impl WipPolicy {
    pub fn shared(limit: u32) -> Self {
        Self {
            shared_limit: limit,
            per_board_limits: BTreeMap::new(),
        }
    }

    /// Checks the numeric constraints only; board existence is checked by the caller.
    pub fn check(&self) -> Result<(), ModelError> {
        if self.shared_limit < 1 {
            return Err(ModelError::InvalidPolicy(
                "shared_limit must be at least 1".into(),
            ));
        }
        for (board, &limit) in &self.per_board_limits {
            if limit < 1 || limit > self.shared_limit {
                return Err(ModelError::InvalidPolicy(format!(
                    "limit {limit} for board {board} must be between 1 and the shared limit {}",
                    self.shared_limit
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub stage: Stage,
}

impl ColumnSpec {
    pub fn new(name: impl Into<String>, stage: Stage) -> Self {
        Self {
            name: name.into(),
            stage,
        }
    }
}

pub fn default_columns() -> Vec<ColumnSpec> {
    vec![
        ColumnSpec::new("Backlog", Stage::Queue),
        ColumnSpec::new("In Progress", Stage::Active),
        ColumnSpec::new("Done", Stage::Done),
    ]
}

/// Column names must be unique and every stage kind must be present.
pub fn check_columns(columns: &[ColumnSpec]) -> Result<(), ModelError> {
    for (i, c) in columns.iter().enumerate() {
        if c.name.trim().is_empty() {
            return Err(ModelError::InvalidColumns("column name is empty".into()));
        }
        if columns[..i].iter().any(|o| o.name == c.name) {
            return Err(ModelError::InvalidColumns(format!(
                "duplicate column {:?}",
                c.name
            )));
        }
    }
    for stage in Stage::ALL {
        if !columns.iter().any(|c| c.stage == stage) {
            return Err(ModelError::InvalidColumns(format!(
                "no column with stage {stage}"
            )));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub stage: Stage,
    /// Queue order; index 0 is the front.
    pub cards: Vec<CardId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Board {
    pub id: BoardId,
    pub name: String,
    pub columns: Vec<Column>,
}

impl Board {
    pub fn new(id: BoardId, name: impl Into<String>, columns: &[ColumnSpec]) -> Self {
        Self {
            id,
            name: name.into(),
            columns: columns
                .iter()
                .map(|c| Column {
                    name: c.name.clone(),
                    stage: c.stage,
                    cards: Vec::new(),
                })
                .collect(),
        }
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// The first column of the given stage. Every valid board has one.
    pub fn first_of(&self, stage: Stage) -> Option<&Column> {
        self.columns.iter().find(|c| c.stage == stage)
    }

    pub fn active_count(&self) -> usize {
        self.columns
            .iter()
            .filter(|c| c.stage == Stage::Active)
            .map(|c| c.cards.len())
            .sum()
    }

    /// Column holding the card, with its position in that column.
    pub fn find(&self, card: &CardId) -> Option<(&Column, usize)> {
        self.columns
            .iter()
            .find_map(|c| c.cards.iter().position(|x| x == card).map(|p| (c, p)))
    }

    pub fn card_count(&self) -> usize {
        self.columns.iter().map(|c| c.cards.len()).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Card {
    pub id: CardId,
    pub kind: CardKind,
    pub title: String,
    #[serde(default)]
    pub description: String,
    /// Set iff the card is an X-Tag.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub focus_id: Option<FocusId>,
    /// Set iff the card is a change task.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin_xtag: Option<CardId>,
    pub created_at: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub started_at: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub done_at: Option<u64>,
}

impl Card {
    pub fn board_id(&self) -> BoardId {
        match &self.focus_id {
            Some(f) => f.clone(),
            None => BoardId::dev(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct XMark {
    pub dev_card: CardId,
    pub xtag: CardId,
    pub created_at: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Revision {
    pub version: u32,
    pub statement: String,
    pub at: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Principle {
    pub id: PrincipleId,
    pub focus_id: FocusId,
    /// Current statement; always equal to the last revision's text.
    pub statement: String,
    pub version: u32,
    pub revisions: Vec<Revision>,
    #[serde(default)]
    pub retired: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrincipleLink {
    pub xtag: CardId,
    pub principle: PrincipleId,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FocusBoard {
    pub focus_name: String,
    pub board: Board,
    pub principles: Vec<Principle>,
}

impl FocusBoard {
    pub fn id(&self) -> &FocusId {
        &self.board.id
    }

    pub fn principle(&self, id: &PrincipleId) -> Option<&Principle> {
        self.principles.iter().find(|p| &p.id == id)
    }
}

/// Per-kind id counters. Cards are never deleted, so each counter equals the
/// number of entities of that kind ever created.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub tasks: u64,
    pub xtags: u64,
    pub change_tasks: u64,
    pub focuses: u64,
    pub principles: u64,
}

impl Counters {
    pub fn next_card_id(&self, kind: CardKind) -> CardId {
        match kind {
            CardKind::Task => CardId::new(format!("T{}", self.tasks + 1)),
            CardKind::Xtag => CardId::new(format!("X{}", self.xtags + 1)),
            CardKind::ChangeTask => CardId::new(format!("C{}", self.change_tasks + 1)),
        }
    }

    pub fn next_focus_id(&self) -> FocusId {
        FocusId::new(format!("F{}", self.focuses + 1))
    }

    pub fn next_principle_id(&self) -> PrincipleId {
        PrincipleId::new(format!("P{}", self.principles + 1))
    }
}

/// Everything needed to construct the empty workspace that a log replays onto.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkspaceConfig {
    pub id: WorkspaceId,
    pub name: String,
    pub wip_policy: WipPolicy,
    #[serde(default)]
    pub completion_policy: CompletionPolicy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dev_columns: Option<Vec<ColumnSpec>>,
}

impl WorkspaceConfig {
    pub fn new(
        id: impl Into<WorkspaceId>,
        name: impl Into<String>,
        wip_policy: WipPolicy,
        completion_policy: CompletionPolicy,
    ) -> Self {
        Self {
            id: id.into(),
            name: name.into(),
            wip_policy,
            completion_policy,
            dev_columns: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Workspace {
    pub id: WorkspaceId,
    pub name: String,
    pub dev_board: Board,
    pub focus_boards: Vec<FocusBoard>,
    pub cards: BTreeMap<CardId, Card>,
    pub marks: Vec<XMark>,
    pub principle_links: Vec<PrincipleLink>,
    pub wip_policy: WipPolicy,
    pub completion_policy: CompletionPolicy,
    /// Logical clock; equals the seq of the last applied event.
    pub clock: u64,
    pub counters: Counters,
}

/// Builds an empty workspace named `name` with the default development columns.
pub fn new_workspace(
    name: &str,
    wip_policy: WipPolicy,
    completion_policy: CompletionPolicy,
) -> Result<Workspace, ModelError> {
    Workspace::new(&WorkspaceConfig::new(
        slug(name),
        name,
        wip_policy,
        completion_policy,
    ))
}

/// Lowercase, dash-separated form of a name, usable as a directory name.
pub fn slug(name: &str) -> String {
    let mut out = String::new();
    for ch in name.trim().chars() {
        if ch.is_ascii_alphanumeric() {
            out.push(ch.to_ascii_lowercase());
        } else if !out.ends_with('-') && !out.is_empty() {
            out.push('-');
        }
    }
    while out.ends_with('-') {
        out.pop();
    }
    if out.is_empty() {
        out.push_str("workspace");
    }
    out
}

impl Workspace {
    pub fn new(config: &WorkspaceConfig) -> Result<Self, ModelError> {
        config.wip_policy.check()?;
        if let Some(b) = config
            .wip_policy
            .per_board_limits
            .keys()
            .find(|b| !b.is_dev())
        {
            return Err(ModelError::InvalidPolicy(format!("unknown board {b}")));
        }
        let columns = config.dev_columns.clone().unwrap_or_else(default_columns);
        check_columns(&columns)?;
        Ok(Self {
            id: config.id.clone(),
            name: config.name.clone(),
            dev_board: Board::new(BoardId::dev(), "Development", &columns),
            focus_boards: Vec::new(),
            cards: BTreeMap::new(),
            marks: Vec::new(),
            principle_links: Vec::new(),
            wip_policy: config.wip_policy.clone(),
            completion_policy: config.completion_policy,
            clock: 0,
            counters: Counters::default(),
        })
    }

    /// Hex SHA-256 of the canonical JSON encoding.
    pub fn checksum(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_bytes()))
    }

    /// Canonical JSON encoding: struct field order and sorted maps make it stable.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("workspace serializes")
    }

    pub fn boards(&self) -> impl Iterator<Item = &Board> {
        std::iter::once(&self.dev_board).chain(self.focus_boards.iter().map(|f| &f.board))
    }

    pub fn board(&self, id: &BoardId) -> Option<&Board> {
        self.boards().find(|b| &b.id == id)
    }

    pub fn board_mut(&mut self, id: &BoardId) -> Option<&mut Board> {
        if id.is_dev() {
            return Some(&mut self.dev_board);
        }
        self.focus_boards
            .iter_mut()
            .find(|f| f.id() == id)
            .map(|f| &mut f.board)
    }

    pub fn focus(&self, id: &FocusId) -> Option<&FocusBoard> {
        self.focus_boards.iter().find(|f| f.id() == id)
    }

    pub fn focus_mut(&mut self, id: &FocusId) -> Option<&mut FocusBoard> {
        self.focus_boards.iter_mut().find(|f| f.id() == id)
    }

    /// Resolves a focus by id or (case-insensitive) name.
    pub fn resolve_focus(&self, key: &str) -> Option<&FocusBoard> {
        self.focus_boards
            .iter()
            .find(|f| f.id().as_str() == key)
            .or_else(|| {
                self.focus_boards
                    .iter()
                    .find(|f| f.focus_name.eq_ignore_ascii_case(key))
            })
    }

    pub fn principle(&self, id: &PrincipleId) -> Option<&Principle> {
        self.focus_boards.iter().find_map(|f| f.principle(id))
    }

    pub fn principle_mut(&mut self, id: &PrincipleId) -> Option<&mut Principle> {
        self.focus_boards
            .iter_mut()
            .flat_map(|f| f.principles.iter_mut())
            .find(|p| &p.id == id)
    }

    pub fn card(&self, id: &CardId) -> Option<&Card> {
        self.cards.get(id)
    }

    /// Stage of the column currently holding the card.
    pub fn stage_of(&self, id: &CardId) -> Option<Stage> {
        self.locate(id).map(|(_, col, _)| col.stage)
    }

    /// The board and column holding the card, plus its queue position.
    pub fn locate(&self, id: &CardId) -> Option<(&Board, &Column, usize)> {
        let card = self.cards.get(id)?;
        let board = self.board(&card.board_id())?;
        let (col, pos) = board.find(id)?;
        Some((board, col, pos))
    }

    pub fn active_count(&self) -> usize {
        self.boards().map(Board::active_count).sum()
    }

    /// X-Tags marked from a development card, in mark order.
    pub fn xtags_of<'a>(&'a self, dev_card: &'a CardId) -> impl Iterator<Item = &'a CardId> + 'a {
        self.marks
            .iter()
            .filter(move |m| &m.dev_card == dev_card)
            .map(|m| &m.xtag)
    }

    /// Development cards marked to an X-Tag, in mark order.
    pub fn dev_cards_of<'a>(&'a self, xtag: &'a CardId) -> impl Iterator<Item = &'a CardId> + 'a {
        self.marks
            .iter()
            .filter(move |m| &m.xtag == xtag)
            .map(|m| &m.dev_card)
    }

    pub fn has_mark(&self, dev_card: &CardId, xtag: &CardId) -> bool {
        self.marks
            .iter()
            .any(|m| &m.dev_card == dev_card && &m.xtag == xtag)
    }

    pub fn principles_of<'a>(&'a self, xtag: &'a CardId) -> impl Iterator<Item = &'a PrincipleId> + 'a {
        self.principle_links
            .iter()
            .filter(move |l| &l.xtag == xtag)
            .map(|l| &l.principle)
    }

    pub fn is_done(&self, id: &CardId) -> bool {
        self.stage_of(id) == Some(Stage::Done)
    }
}
