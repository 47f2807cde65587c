//! The rules engine.
//!
//! Each command is decided against an immutable workspace: [`decide`] either
//! rejects it with a [`Rule`] or returns the effects it would have. Accepted
//! effects are then applied through the same fold used by replay. Rejection
//! never touches the workspace, which is what makes every command atomic.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::command::{ChangeSpec, Command};
use crate::effect::{apply_event, Effect};
use crate::event::Event;
use crate::ids::{BoardId, CardId, PrincipleId};
use crate::model::{
    check_columns, default_columns, Card, CardKind, CompletionPolicy, Stage, WipPolicy, Workspace,
};

/// Name of the rule that rejected a command. The variant names are part of
/// the wire format (HTTP 409 bodies, CLI stderr).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rule {
    InvalidPolicy,
    InvalidColumns,
    EmptyTitle,
    DuplicateFocus,
    NoPrinciples,
    UnknownTask,
    UnknownFocus,
    UnknownCard,
    UnknownXtag,
    UnknownColumn,
    UnknownPrinciple,
    UnknownMark,
    WrongKind,
    MissingPrinciple,
    TaskAlreadyDone,
    DuplicateMark,
    ProvenanceMark,
    WipExceeded,
    NotQueued,
    NotActive,
    GateBlocked,
    DirectXtagDone,
    CardDone,
    PrincipleRetired,
    RetireWouldOrphan,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::InvalidPolicy => "InvalidPolicy",
            Rule::InvalidColumns => "InvalidColumns",
            Rule::EmptyTitle => "EmptyTitle",
            Rule::DuplicateFocus => "DuplicateFocus",
            Rule::NoPrinciples => "NoPrinciples",
            Rule::UnknownTask => "UnknownTask",
            Rule::UnknownFocus => "UnknownFocus",
            Rule::UnknownCard => "UnknownCard",
            Rule::UnknownXtag => "UnknownXtag",
            Rule::UnknownColumn => "UnknownColumn",
            Rule::UnknownPrinciple => "UnknownPrinciple",
            Rule::UnknownMark => "UnknownMark",
            Rule::WrongKind => "WrongKind",
            Rule::MissingPrinciple => "MissingPrinciple",
            Rule::TaskAlreadyDone => "TaskAlreadyDone",
            Rule::DuplicateMark => "DuplicateMark",
            Rule::ProvenanceMark => "ProvenanceMark",
            Rule::WipExceeded => "WipExceeded",
            Rule::NotQueued => "NotQueued",
            Rule::NotActive => "NotActive",
            Rule::GateBlocked => "GateBlocked",
            Rule::DirectXtagDone => "DirectXtagDone",
            Rule::CardDone => "CardDone",
            Rule::PrincipleRetired => "PrincipleRetired",
            Rule::RetireWouldOrphan => "RetireWouldOrphan",
        }
    }

    /// Rules that mean "the referenced entity does not exist".
    pub fn is_unknown_entity(self) -> bool {
        matches!(
            self,
            Rule::UnknownTask
                | Rule::UnknownFocus
                | Rule::UnknownCard
                | Rule::UnknownXtag
                | Rule::UnknownColumn
                | Rule::UnknownPrinciple
                | Rule::UnknownMark
        )
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub rule: Rule,
    pub message: String,
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.rule, self.message)
    }
}

impl std::error::Error for Rejection {}

fn reject<T>(rule: Rule, message: impl Into<String>) -> Result<T, Rejection> {
    Err(Rejection {
        rule,
        message: message.into(),
    })
}

/// What an accepted command does.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Decision {
    pub effects: Vec<Effect>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionResult {
    pub accepted: bool,
    pub events: Vec<Event>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rejection: Option<Rejection>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl TransitionResult {
    pub fn rejected(rejection: Rejection) -> Self {
        Self {
            accepted: false,
            events: Vec::new(),
            rejection: Some(rejection),
            warnings: Vec::new(),
        }
    }

    pub fn rule(&self) -> Option<Rule> {
        self.rejection.as_ref().map(|r| r.rule)
    }
}

/// Decides and, if accepted, applies `cmd` to `ws`. A rejected command leaves
/// `ws` untouched.
pub fn execute(ws: &mut Workspace, cmd: &Command, wall_time: Option<String>) -> TransitionResult {
    match decide(ws, cmd) {
        Err(rejection) => TransitionResult::rejected(rejection),
        Ok(decision) => {
            let event = Event {
                seq: ws.clock + 1,
                command: cmd.clone(),
                effects: decision.effects,
                wall_time,
            };
            apply_event(ws, &event).expect("decided effects apply to the workspace they were decided on");
            TransitionResult {
                accepted: true,
                events: vec![event],
                rejection: None,
                warnings: decision.warnings,
            }
        }
    }
}

/// Pure form of [`execute`]: `(ws, cmd) -> (ws', result)`.
pub fn transition(ws: &Workspace, cmd: &Command) -> (Workspace, TransitionResult) {
    let mut next = ws.clone();
    let result = execute(&mut next, cmd, None);
    (next, result)
}

pub fn decide(ws: &Workspace, cmd: &Command) -> Result<Decision, Rejection> {
    match cmd {
        Command::CreateTask { title, description } => create_task(ws, title, description),
        Command::AddFocus {
            name,
            principles,
            columns,
        } => add_focus(ws, name, principles, columns.as_deref()),
        Command::AddPrinciple { focus, statement } => add_principle(ws, focus, statement),
        Command::RevisePrinciple {
            principle,
            statement,
        } => revise_principle(ws, principle, statement),
        Command::RetirePrinciple { principle } => retire_principle(ws, principle),
        Command::ExtractXtag {
            task,
            focus,
            title,
            description,
            principles,
        } => extract_xtag(ws, task, focus, title, description, principles),
        Command::LinkMark {
            dev_card,
            xtag,
            note,
        } => link_mark(ws, dev_card, xtag, note.as_deref()),
        Command::UnlinkMark { dev_card, xtag } => unlink_mark(ws, dev_card, xtag),
        Command::StartTask { task } => start_task(ws, task),
        Command::MoveCard { card, column } => move_card(ws, card, column),
        Command::CompleteXtag { xtag, changes } => complete_xtag(ws, xtag, changes),
        Command::CompleteTask { task } => complete_task(ws, task),
        Command::SetPolicy {
            wip_policy,
            completion_policy,
        } => set_policy(ws, wip_policy, *completion_policy),
    }
}

fn accepted(effects: Vec<Effect>) -> Result<Decision, Rejection> {
    Ok(Decision {
        effects,
        warnings: Vec::new(),
    })
}

fn nonempty(text: &str, what: &str) -> Result<(), Rejection> {
    if text.trim().is_empty() {
        return reject(Rule::EmptyTitle, format!("{what} must not be empty"));
    }
    Ok(())
}

/// A development-board card (task or change task).
fn dev_card<'a>(ws: &'a Workspace, id: &CardId, unknown: Rule) -> Result<&'a Card, Rejection> {
    match ws.card(id) {
        None => reject(unknown, format!("no card {id}")),
        Some(c) if !c.kind.is_dev() => {
            reject(Rule::WrongKind, format!("{id} is not a development card"))
        }
        Some(c) => Ok(c),
    }
}

fn xtag_card<'a>(ws: &'a Workspace, id: &CardId, unknown: Rule) -> Result<&'a Card, Rejection> {
    match ws.card(id) {
        None => reject(unknown, format!("no card {id}")),
        Some(c) if c.kind != CardKind::Xtag => {
            reject(Rule::WrongKind, format!("{id} is not an X-Tag"))
        }
        Some(c) => Ok(c),
    }
}

fn column_name(ws: &Workspace, board: &BoardId, stage: Stage) -> String {
    ws.board(board)
        .and_then(|b| b.first_of(stage))
        .map(|c| c.name.clone())
        .expect("every board has a column of each stage")
}

/// Fails unless adding `additions[b]` active cards to each board `b` keeps
/// both the shared limit and every per-board limit.
fn check_wip(ws: &Workspace, additions: &BTreeMap<BoardId, usize>, what: &str) -> Result<(), Rejection> {
    let added: usize = additions.values().sum();
    let in_use = ws.active_count();
    let limit = ws.wip_policy.shared_limit as usize;
    if in_use + added > limit {
        return reject(
            Rule::WipExceeded,
            format!("{what} needs {added} active slot(s); {in_use} of {limit} in use"),
        );
    }
    for (board, &n) in additions {
        if let Some(&cap) = ws.wip_policy.per_board_limits.get(board) {
            let used = ws.board(board).map_or(0, |b| b.active_count());
            if used + n > cap as usize {
                return reject(
                    Rule::WipExceeded,
                    format!("{what} needs {n} active slot(s) on board {board}; {used} of {cap} in use"),
                );
            }
        }
    }
    Ok(())
}

/// Tracks insertion positions while a command moves several cards.
#[derive(Default)]
struct Placement {
    pending: BTreeMap<(BoardId, String), usize>,
}

impl Placement {
    /// Back-of-column index for the next card entering `column`.
    fn back(&mut self, ws: &Workspace, board: &BoardId, column: &str) -> usize {
        let base = ws
            .board(board)
            .and_then(|b| b.column(column))
            .map_or(0, |c| c.cards.len());
        let slot = self
            .pending
            .entry((board.clone(), column.to_owned()))
            .or_insert(0);
        *slot += 1;
        base + *slot - 1
    }
}

fn move_effect(ws: &Workspace, card: &CardId, to: &str, placement: &mut Placement) -> Effect {
    let (board, from, _) = ws.locate(card).expect("card is placed");
    let board_id = board.id.clone();
    let from = from.name.clone();
    // Re-entering the same column: the card itself is removed first.
    let position = if from == to {
        placement.back(ws, &board_id, to) - 1
    } else {
        placement.back(ws, &board_id, to)
    };
    Effect::CardMoved {
        card: card.clone(),
        from,
        to: to.to_owned(),
        position,
    }
}

/// Moves a development card into an active column together with every
/// linked X-Tag still waiting in a queue column, under one WIP check.
fn co_start(ws: &Workspace, card: &CardId, column: &str) -> Result<Vec<Effect>, Rejection> {
    let mut placement = Placement::default();
    let mut additions: BTreeMap<BoardId, usize> = BTreeMap::new();
    *additions.entry(BoardId::dev()).or_default() += 1;
    let mut effects = vec![move_effect(ws, card, column, &mut placement)];
    let mut seen: Vec<&CardId> = Vec::new();
    for xtag in ws.xtags_of(card) {
        if seen.contains(&xtag) || ws.stage_of(xtag) != Some(Stage::Queue) {
            continue;
        }
        seen.push(xtag);
        let board = ws.cards[xtag].board_id();
        let active = column_name(ws, &board, Stage::Active);
        *additions.entry(board).or_default() += 1;
        effects.push(move_effect(ws, xtag, &active, &mut placement));
    }
    check_wip(ws, &additions, &format!("starting {card}"))?;
    Ok(effects)
}

/// Unfinished X-Tags linked to a development card.
fn unfinished_xtags(ws: &Workspace, card: &CardId) -> Vec<CardId> {
    ws.xtags_of(card)
        .filter(|x| !ws.is_done(x))
        .cloned()
        .collect()
}

/// Completion gating shared by `complete_task` and moves into a done column.
fn gate(ws: &Workspace, card: &CardId) -> Result<Vec<String>, Rejection> {
    let open = unfinished_xtags(ws, card);
    if open.is_empty() {
        return Ok(Vec::new());
    }
    match ws.completion_policy {
        CompletionPolicy::Strict => {
            let ids: Vec<_> = open.iter().map(CardId::as_str).collect();
            reject(
                Rule::GateBlocked,
                format!("{card} has unfinished X-Tags: {}", ids.join(", ")),
            )
        }
        CompletionPolicy::Warn => Ok(open.iter().map(|x| format!("{x} not done")).collect()),
    }
}

fn create_task(ws: &Workspace, title: &str, description: &str) -> Result<Decision, Rejection> {
    nonempty(title, "title")?;
    let dev = BoardId::dev();
    let column = column_name(ws, &dev, Stage::Queue);
    let position = ws.dev_board.column(&column).map_or(0, |c| c.cards.len());
    accepted(vec![Effect::CardCreated {
        card: ws.counters.next_card_id(CardKind::Task),
        card_kind: CardKind::Task,
        title: title.to_owned(),
        description: description.to_owned(),
        focus: None,
        origin_xtag: None,
        board: dev,
        column,
        position,
    }])
}

fn add_focus(
    ws: &Workspace,
    name: &str,
    principles: &[String],
    columns: Option<&[crate::model::ColumnSpec]>,
) -> Result<Decision, Rejection> {
    nonempty(name, "focus name")?;
    let name = name.trim();
    if ws
        .focus_boards
        .iter()
        .any(|f| f.focus_name.eq_ignore_ascii_case(name))
    {
        return reject(Rule::DuplicateFocus, format!("focus {name:?} already exists"));
    }
    if principles.is_empty() || principles.iter().any(|p| p.trim().is_empty()) {
        return reject(
            Rule::NoPrinciples,
            "a focus needs at least one non-empty principle",
        );
    }
    let columns = columns.map(<[_]>::to_vec).unwrap_or_else(default_columns);
    if let Err(e) = check_columns(&columns) {
        return reject(Rule::InvalidColumns, e.to_string());
    }
    let focus = ws.counters.next_focus_id();
    let mut effects = vec![Effect::FocusAdded {
        focus: focus.clone(),
        name: name.to_owned(),
        columns,
    }];
    let mut counters = ws.counters.clone();
    for statement in principles {
        effects.push(Effect::PrincipleAdded {
            principle: counters.next_principle_id(),
            focus: focus.clone(),
            statement: statement.clone(),
        });
        counters.principles += 1;
    }
    accepted(effects)
}

fn add_principle(ws: &Workspace, focus: &BoardId, statement: &str) -> Result<Decision, Rejection> {
    if ws.focus(focus).is_none() {
        return reject(Rule::UnknownFocus, format!("no focus {focus}"));
    }
    nonempty(statement, "principle statement")?;
    accepted(vec![Effect::PrincipleAdded {
        principle: ws.counters.next_principle_id(),
        focus: focus.clone(),
        statement: statement.to_owned(),
    }])
}

fn revise_principle(ws: &Workspace, id: &PrincipleId, statement: &str) -> Result<Decision, Rejection> {
    let Some(p) = ws.principle(id) else {
        return reject(Rule::UnknownPrinciple, format!("no principle {id}"));
    };
    if p.retired {
        return reject(Rule::PrincipleRetired, format!("principle {id} is retired"));
    }
    nonempty(statement, "principle statement")?;
    accepted(vec![Effect::PrincipleRevised {
        principle: id.clone(),
        version: p.version + 1,
        statement: statement.to_owned(),
    }])
}

fn retire_principle(ws: &Workspace, id: &PrincipleId) -> Result<Decision, Rejection> {
    let Some(p) = ws.principle(id) else {
        return reject(Rule::UnknownPrinciple, format!("no principle {id}"));
    };
    if p.retired {
        return reject(Rule::PrincipleRetired, format!("principle {id} is already retired"));
    }
    for link in ws.principle_links.iter().filter(|l| &l.principle == id) {
        if ws.is_done(&link.xtag) {
            continue;
        }
        let others = ws
            .principles_of(&link.xtag)
            .filter(|q| *q != id)
            .filter_map(|q| ws.principle(q))
            .any(|q| !q.retired);
        if !others {
            return reject(
                Rule::RetireWouldOrphan,
                format!("{} would be left without a live principle", link.xtag),
            );
        }
    }
    accepted(vec![Effect::PrincipleRetired {
        principle: id.clone(),
    }])
}

fn extract_xtag(
    ws: &Workspace,
    task: &CardId,
    focus: &BoardId,
    title: &str,
    description: &str,
    principles: &[PrincipleId],
) -> Result<Decision, Rejection> {
    dev_card(ws, task, Rule::UnknownTask)?;
    if ws.is_done(task) {
        return reject(Rule::TaskAlreadyDone, format!("{task} is done"));
    }
    let Some(board) = ws.focus(focus) else {
        return reject(Rule::UnknownFocus, format!("no focus {focus}"));
    };
    nonempty(title, "title")?;
    if principles.is_empty() {
        return reject(Rule::MissingPrinciple, "an X-Tag needs at least one principle");
    }
    let mut unique: Vec<&PrincipleId> = Vec::new();
    for p in principles {
        match board.principle(p) {
            Some(pr) if !pr.retired => {
                if !unique.contains(&p) {
                    unique.push(p);
                }
            }
            _ => {
                return reject(
                    Rule::MissingPrinciple,
                    format!("{p} is not a live principle of {}", board.focus_name),
                )
            }
        }
    }
    let xtag = ws.counters.next_card_id(CardKind::Xtag);
    let column = column_name(ws, focus, Stage::Queue);
    let position = board.board.column(&column).map_or(0, |c| c.cards.len());
    let mut effects = vec![
        Effect::CardCreated {
            card: xtag.clone(),
            card_kind: CardKind::Xtag,
            title: title.to_owned(),
            description: description.to_owned(),
            focus: Some(focus.clone()),
            origin_xtag: None,
            board: focus.clone(),
            column,
            position,
        },
        Effect::MarkAdded {
            dev_card: task.clone(),
            xtag: xtag.clone(),
            note: None,
        },
    ];
    effects.extend(unique.into_iter().map(|p| Effect::PrincipleLinked {
        xtag: xtag.clone(),
        principle: p.clone(),
    }));
    accepted(effects)
}

fn link_mark(ws: &Workspace, dev: &CardId, xtag: &CardId, note: Option<&str>) -> Result<Decision, Rejection> {
    dev_card(ws, dev, Rule::UnknownCard)?;
    xtag_card(ws, xtag, Rule::UnknownCard)?;
    if ws.has_mark(dev, xtag) {
        return reject(Rule::DuplicateMark, format!("{dev} is already marked to {xtag}"));
    }
    if ws.is_done(dev) {
        return reject(Rule::TaskAlreadyDone, format!("{dev} is done"));
    }
    let mut effects = vec![Effect::MarkAdded {
        dev_card: dev.clone(),
        xtag: xtag.clone(),
        note: note.map(str::to_owned),
    }];
    if ws.stage_of(dev) == Some(Stage::Active) && ws.stage_of(xtag) == Some(Stage::Queue) {
        let board = ws.cards[xtag].board_id();
        let active = column_name(ws, &board, Stage::Active);
        check_wip(
            ws,
            &BTreeMap::from([(board, 1)]),
            &format!("co-starting {xtag}"),
        )?;
        effects.push(move_effect(ws, xtag, &active, &mut Placement::default()));
    }
    accepted(effects)
}

fn unlink_mark(ws: &Workspace, dev: &CardId, xtag: &CardId) -> Result<Decision, Rejection> {
    if !ws.has_mark(dev, xtag) {
        return reject(Rule::UnknownMark, format!("no mark ({dev}, {xtag})"));
    }
    if ws.cards[dev].origin_xtag.as_ref() == Some(xtag) {
        return reject(
            Rule::ProvenanceMark,
            format!("{dev} was produced by {xtag}; the mark records its origin"),
        );
    }
    accepted(vec![Effect::MarkRemoved {
        dev_card: dev.clone(),
        xtag: xtag.clone(),
    }])
}

fn start_task(ws: &Workspace, task: &CardId) -> Result<Decision, Rejection> {
    dev_card(ws, task, Rule::UnknownTask)?;
    if ws.stage_of(task) != Some(Stage::Queue) {
        return reject(Rule::NotQueued, format!("{task} is not in a queue column"));
    }
    let active = column_name(ws, &BoardId::dev(), Stage::Active);
    accepted(co_start(ws, task, &active)?)
}

fn move_card(ws: &Workspace, card_id: &CardId, column: &str) -> Result<Decision, Rejection> {
    let Some(card) = ws.card(card_id) else {
        return reject(Rule::UnknownCard, format!("no card {card_id}"));
    };
    let (board, current, _) = ws.locate(card_id).expect("every card is placed");
    if current.stage == Stage::Done {
        return reject(Rule::CardDone, format!("{card_id} is done"));
    }
    let Some(target) = board.column(column) else {
        return reject(
            Rule::UnknownColumn,
            format!("board {} has no column {column:?}", board.id),
        );
    };
    let mut warnings = Vec::new();
    let effects = match target.stage {
        Stage::Done if card.kind == CardKind::Xtag => {
            return reject(
                Rule::DirectXtagDone,
                format!("{card_id} must be finished with complete_xtag"),
            )
        }
        Stage::Done => {
            warnings = gate(ws, card_id)?;
            vec![move_effect(ws, card_id, column, &mut Placement::default())]
        }
        Stage::Active if current.stage != Stage::Active => {
            if card.kind.is_dev() {
                co_start(ws, card_id, column)?
            } else {
                check_wip(
                    ws,
                    &BTreeMap::from([(board.id.clone(), 1)]),
                    &format!("moving {card_id}"),
                )?;
                vec![move_effect(ws, card_id, column, &mut Placement::default())]
            }
        }
        _ => vec![move_effect(ws, card_id, column, &mut Placement::default())],
    };
    Ok(Decision { effects, warnings })
}

fn complete_xtag(ws: &Workspace, xtag: &CardId, changes: &[ChangeSpec]) -> Result<Decision, Rejection> {
    xtag_card(ws, xtag, Rule::UnknownXtag)?;
    if ws.stage_of(xtag) != Some(Stage::Active) {
        return reject(Rule::NotActive, format!("{xtag} is not in an active column"));
    }
    for spec in changes {
        nonempty(&spec.title, "change title")?;
    }
    let board = ws.cards[xtag].board_id();
    let done = column_name(ws, &board, Stage::Done);
    let mut effects = vec![move_effect(ws, xtag, &done, &mut Placement::default())];

    let dev = BoardId::dev();
    let queue = column_name(ws, &dev, Stage::Queue);
    let mut counters = ws.counters.clone();
    let ids: Vec<CardId> = changes
        .iter()
        .map(|_| {
            let id = counters.next_card_id(CardKind::ChangeTask);
            counters.change_tasks += 1;
            id
        })
        .collect();
    // Spec i lands at index i, so the first spec ends up at the front.
    effects.extend(changes.iter().zip(&ids).enumerate().map(|(i, (spec, id))| {
        Effect::CardCreated {
            card: id.clone(),
            card_kind: CardKind::ChangeTask,
            title: spec.title.clone(),
            description: spec.description.clone(),
            focus: None,
            origin_xtag: Some(xtag.clone()),
            board: dev.clone(),
            column: queue.clone(),
            position: i,
        }
    }));
    effects.extend(ids.iter().map(|id| Effect::MarkAdded {
        dev_card: id.clone(),
        xtag: xtag.clone(),
        note: None,
    }));
    accepted(effects)
}

fn complete_task(ws: &Workspace, task: &CardId) -> Result<Decision, Rejection> {
    dev_card(ws, task, Rule::UnknownTask)?;
    if ws.stage_of(task) != Some(Stage::Active) {
        return reject(Rule::NotActive, format!("{task} is not in an active column"));
    }
    let warnings = gate(ws, task)?;
    let done = column_name(ws, &BoardId::dev(), Stage::Done);
    Ok(Decision {
        effects: vec![move_effect(ws, task, &done, &mut Placement::default())],
        warnings,
    })
}

fn set_policy(ws: &Workspace, wip: &WipPolicy, completion: CompletionPolicy) -> Result<Decision, Rejection> {
    if let Err(e) = wip.check() {
        return reject(Rule::InvalidPolicy, e.to_string());
    }
    if let Some(b) = wip.per_board_limits.keys().find(|b| ws.board(b).is_none()) {
        return reject(Rule::InvalidPolicy, format!("unknown board {b}"));
    }
    let in_use = ws.active_count();
    if in_use > wip.shared_limit as usize {
        return reject(
            Rule::WipExceeded,
            format!("{in_use} cards are active; limit {} is too low", wip.shared_limit),
        );
    }
    for (b, &cap) in &wip.per_board_limits {
        let used = ws.board(b).map_or(0, |b| b.active_count());
        if used > cap as usize {
            return reject(
                Rule::WipExceeded,
                format!("{used} cards are active on board {b}; limit {cap} is too low"),
            );
        }
    }
    accepted(vec![Effect::PolicySet {
        wip_policy: wip.clone(),
        completion_policy: completion,
    }])
}
