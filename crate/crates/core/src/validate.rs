//! Structural validation of a workspace.
//!
//! [`validate`] reports every violated invariant as data. Any workspace reached
//! by replaying accepted commands is expected to produce an empty report; the
//! check exists for hand-built or imported state and for the property suites.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::ids::CardId;
use crate::model::{check_columns, Board, CardKind, ColumnSpec, Stage, Workspace};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: String,
    pub ids: Vec<String>,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn has(&self, rule: &str) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }
}

struct Collector(Vec<Violation>);

impl Collector {
    fn push(&mut self, rule: &str, ids: &[&str], message: impl Into<String>) {
        self.0.push(Violation {
            rule: rule.to_owned(),
            ids: ids.iter().map(|s| (*s).to_owned()).collect(),
            message: message.into(),
        });
    }
}

pub fn validate(ws: &Workspace) -> ValidationReport {
    let mut v = Collector(Vec::new());
    check_boards(ws, &mut v);
    check_cards(ws, &mut v);
    check_marks(ws, &mut v);
    check_principles(ws, &mut v);
    check_wip(ws, &mut v);
    ValidationReport {
        ok: v.0.is_empty(),
        violations: v.0,
    }
}

fn check_boards(ws: &Workspace, v: &mut Collector) {
    if !ws.dev_board.id.is_dev() {
        v.push("dev-board", &[ws.dev_board.id.as_str()], "development board must have id dev");
    }
    let mut names = BTreeSet::new();
    let mut ids = BTreeSet::new();
    for f in &ws.focus_boards {
        if !names.insert(f.focus_name.to_ascii_lowercase()) {
            v.push("focus-name-unique", &[f.id().as_str()], format!("duplicate focus name {:?}", f.focus_name));
        }
        if f.id().is_dev() || !ids.insert(f.id().clone()) {
            v.push("board-id-unique", &[f.id().as_str()], "duplicate board id");
        }
    }
    for board in ws.boards() {
        let specs: Vec<ColumnSpec> = board
            .columns
            .iter()
            .map(|c| ColumnSpec::new(c.name.clone(), c.stage))
            .collect();
        if let Err(e) = check_columns(&specs) {
            v.push("board-columns", &[board.id.as_str()], e.to_string());
        }
    }
}

fn placements(ws: &Workspace) -> BTreeMap<&CardId, Vec<(&Board, Stage)>> {
    let mut seen: BTreeMap<&CardId, Vec<(&Board, Stage)>> = BTreeMap::new();
    for board in ws.boards() {
        for col in &board.columns {
            for id in &col.cards {
                seen.entry(id).or_default().push((board, col.stage));
            }
        }
    }
    seen
}

fn check_cards(ws: &Workspace, v: &mut Collector) {
    let seen = placements(ws);
    for (id, places) in &seen {
        if places.len() > 1 {
            v.push("card-placement-unique", &[id.as_str()], format!("card appears in {} columns", places.len()));
        }
        if !ws.cards.contains_key(*id) {
            v.push("card-exists", &[id.as_str()], "placed card has no record");
        }
    }
    for (id, card) in &ws.cards {
        if &card.id != id {
            v.push("card-id", &[id.as_str()], "card record keyed under another id");
        }
        let Some(places) = seen.get(id) else {
            v.push("card-placement-unique", &[id.as_str()], "card is not on any board");
            continue;
        };
        let (board, stage) = places[0];
        match card.kind {
            CardKind::Xtag => match &card.focus_id {
                Some(f) if &board.id == f && ws.focus(f).is_some() => {}
                _ => v.push("card-board-kind", &[id.as_str()], "X-Tag must sit on its own focus board"),
            },
            _ => {
                if !board.id.is_dev() || card.focus_id.is_some() {
                    v.push("card-board-kind", &[id.as_str()], "development card must sit on the development board");
                }
            }
        }
        match (card.kind, &card.origin_xtag) {
            (CardKind::ChangeTask, Some(origin)) => {
                check_provenance(ws, id, origin, card.created_at, v);
            }
            (CardKind::ChangeTask, None) => {
                v.push("change-origin", &[id.as_str()], "change task without origin X-Tag")
            }
            (_, Some(_)) => v.push("change-origin", &[id.as_str()], "only change tasks carry an origin"),
            _ => {}
        }
        check_stamps(ws, id, card, stage, v);
    }
}

fn check_provenance(ws: &Workspace, id: &CardId, origin: &CardId, created_at: u64, v: &mut Collector) {
    match ws.card(origin) {
        Some(x) if x.kind == CardKind::Xtag => match x.done_at {
            // The X-Tag completes in the same command that creates its change tasks.
            Some(done) if done <= created_at => {}
            _ => v.push("provenance", &[id.as_str(), origin.as_str()], "origin X-Tag was not done when the change task was created"),
        },
        _ => v.push("provenance", &[id.as_str(), origin.as_str()], "origin is not an X-Tag"),
    }
    if !ws.has_mark(id, origin) {
        v.push("provenance", &[id.as_str(), origin.as_str()], "change task lost its mark to the origin X-Tag");
    }
}

fn check_stamps(ws: &Workspace, id: &CardId, card: &crate::model::Card, stage: Stage, v: &mut Collector) {
    let ordered = match (card.started_at, card.done_at) {
        (Some(s), Some(d)) => card.created_at <= s && s <= d,
        (Some(s), None) => card.created_at <= s,
        (None, Some(d)) => card.created_at <= d,
        (None, None) => true,
    };
    let latest = card.done_at.or(card.started_at).unwrap_or(card.created_at);
    if !ordered || latest > ws.clock || card.created_at == 0 {
        v.push("timestamps-monotone", &[id.as_str()], "timestamps out of order");
    }
    let consistent = match stage {
        Stage::Done => card.done_at.is_some(),
        Stage::Active => card.started_at.is_some() && card.done_at.is_none(),
        Stage::Queue => card.done_at.is_none(),
    };
    if !consistent {
        v.push("stage-stamps", &[id.as_str()], format!("stamps disagree with {stage} column"));
    }
}

fn check_marks(ws: &Workspace, v: &mut Collector) {
    let mut pairs = BTreeSet::new();
    for m in &ws.marks {
        let ids = [m.dev_card.as_str(), m.xtag.as_str()];
        let dev = ws.card(&m.dev_card).map(|c| c.kind);
        let tag = ws.card(&m.xtag).map(|c| c.kind);
        match (dev, tag) {
            (Some(d), Some(CardKind::Xtag)) if d.is_dev() => {}
            (None, _) | (_, None) => v.push("mark-endpoints", &ids, "mark references a missing card"),
            _ => v.push("mark-endpoints", &ids, "mark must join a development card and an X-Tag"),
        }
        if !pairs.insert((&m.dev_card, &m.xtag)) {
            v.push("mark-unique", &ids, "duplicate mark");
        }
    }
}

fn check_principles(ws: &Workspace, v: &mut Collector) {
    for f in &ws.focus_boards {
        let mut ids = BTreeSet::new();
        for p in &f.principles {
            if !ids.insert(&p.id) {
                v.push("principle-unique", &[p.id.as_str()], "duplicate principle id");
            }
            let last = p.revisions.last();
            if p.version == 0
                || p.version as usize != p.revisions.len()
                || last.map(|r| (r.version, r.statement.as_str())) != Some((p.version, p.statement.as_str()))
                || p.revisions.iter().enumerate().any(|(i, r)| r.version as usize != i + 1)
            {
                v.push("principle-version", &[p.id.as_str()], "version must equal the number of revisions");
            }
            if &p.focus_id != f.id() {
                v.push("principle-scope", &[p.id.as_str()], "principle filed under another focus");
            }
        }
        let has_xtags = f.board.card_count() > 0;
        if has_xtags && f.principles.is_empty() {
            v.push("focus-needs-principle", &[f.id().as_str()], "focus board has X-Tags but no principles");
        }
    }
    let mut links = BTreeSet::new();
    for l in &ws.principle_links {
        let ids = [l.xtag.as_str(), l.principle.as_str()];
        if !links.insert((&l.xtag, &l.principle)) {
            v.push("principle-link-unique", &ids, "duplicate principle link");
        }
        let card = ws.card(&l.xtag);
        let principle = ws.principle(&l.principle);
        match (card, principle) {
            (Some(c), Some(p)) if c.kind == CardKind::Xtag && c.focus_id.as_ref() == Some(&p.focus_id) => {}
            _ => v.push("principle-link-scope", &ids, "link must target a principle of the X-Tag's own focus"),
        }
    }
    for (id, card) in ws.cards.iter().filter(|(_, c)| c.kind == CardKind::Xtag) {
        let linked: Vec<_> = ws.principles_of(id).filter_map(|p| ws.principle(p)).collect();
        if linked.is_empty() {
            v.push("xtag-needs-principle", &[id.as_str()], "X-Tag is not linked to any principle");
        } else if card.done_at.is_none() && linked.iter().all(|p| p.retired) {
            v.push("xtag-live-principle", &[id.as_str()], "live X-Tag has only retired principles");
        }
    }
}

fn check_wip(ws: &Workspace, v: &mut Collector) {
    if let Err(e) = ws.wip_policy.check() {
        v.push("wip-policy", &[], e.to_string());
    }
    let in_use = ws.active_count();
    if in_use > ws.wip_policy.shared_limit as usize {
        v.push(
            "wip-shared",
            &[],
            format!("{in_use} active cards exceed the shared limit {}", ws.wip_policy.shared_limit),
        );
    }
    for (b, &cap) in &ws.wip_policy.per_board_limits {
        match ws.board(b) {
            None => v.push("wip-policy", &[b.as_str()], "limit for unknown board"),
            Some(board) if board.active_count() > cap as usize => {
                v.push("wip-board", &[b.as_str()], format!("{} active cards exceed limit {cap}", board.active_count()))
            }
            _ => {}
        }
    }
}
