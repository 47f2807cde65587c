//! Effects are the state deltas recorded in each event. Applying an event is a
//! pure fold step: the engine uses the same code path as replay, so a live
//! workspace and a replayed one cannot drift apart.

use serde::{Deserialize, Serialize};

use crate::event::Event;
use crate::ids::{BoardId, CardId, FocusId, PrincipleId};
use crate::model::{
    check_columns, Board, Card, CardKind, ColumnSpec, CompletionPolicy, FocusBoard, Principle,
    PrincipleLink, Revision, Stage, WipPolicy, Workspace, XMark,
};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Effect {
    CardCreated {
        card: CardId,
        card_kind: CardKind,
        title: String,
        #[serde(default)]
        description: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        focus: Option<FocusId>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        origin_xtag: Option<CardId>,
        board: BoardId,
        column: String,
        position: usize,
    },
    CardMoved {
        card: CardId,
        from: String,
        to: String,
        position: usize,
    },
    MarkAdded {
        dev_card: CardId,
        xtag: CardId,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        note: Option<String>,
    },
    MarkRemoved {
        dev_card: CardId,
        xtag: CardId,
    },
    FocusAdded {
        focus: FocusId,
        name: String,
        columns: Vec<ColumnSpec>,
    },
    PrincipleAdded {
        principle: PrincipleId,
        focus: FocusId,
        statement: String,
    },
    PrincipleRevised {
        principle: PrincipleId,
        version: u32,
        statement: String,
    },
    PrincipleRetired {
        principle: PrincipleId,
    },
    PrincipleLinked {
        xtag: CardId,
        principle: PrincipleId,
    },
    PolicySet {
        wip_policy: WipPolicy,
        completion_policy: CompletionPolicy,
    },
}

/// Why an event could not be applied.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ApplyError {
    #[error("expected seq {expected}, found {found}")]
    SequenceGap { expected: u64, found: u64 },
    #[error("{0}")]
    Inconsistent(String),
}

fn bad(msg: impl Into<String>) -> ApplyError {
    ApplyError::Inconsistent(msg.into())
}

/// Applies one event on top of `ws`. On error `ws` may be partially updated;
/// callers that need atomicity apply to a clone.
pub fn apply_event(ws: &mut Workspace, event: &Event) -> Result<(), ApplyError> {
    if event.seq != ws.clock + 1 {
        return Err(ApplyError::SequenceGap {
            expected: ws.clock + 1,
            found: event.seq,
        });
    }
    if event.effects.is_empty() {
        return Err(bad("event has no effects"));
    }
    for effect in &event.effects {
        apply_effect(ws, effect, event.seq)?;
    }
    ws.clock = event.seq;
    Ok(())
}

fn apply_effect(ws: &mut Workspace, effect: &Effect, at: u64) -> Result<(), ApplyError> {
    match effect {
        Effect::CardCreated {
            card,
            card_kind,
            title,
            description,
            focus,
            origin_xtag,
            board,
            column,
            position,
        } => {
            if ws.cards.contains_key(card) {
                return Err(bad(format!("card {card} already exists")));
            }
            if ws.counters.next_card_id(*card_kind) != *card {
                return Err(bad(format!("card id {card} out of sequence")));
            }
            let expected_board = focus.clone().unwrap_or_else(BoardId::dev);
            if (*card_kind == CardKind::Xtag) != focus.is_some() || expected_board != *board {
                return Err(bad(format!("card {card} placed on wrong board {board}")));
            }
            if (*card_kind == CardKind::ChangeTask) != origin_xtag.is_some() {
                return Err(bad(format!("card {card} has inconsistent origin")));
            }
            let b = ws
                .board_mut(board)
                .ok_or_else(|| bad(format!("unknown board {board}")))?;
            let col = b
                .columns
                .iter_mut()
                .find(|c| &c.name == column)
                .ok_or_else(|| bad(format!("unknown column {column}")))?;
            if *position > col.cards.len() {
                return Err(bad(format!("position {position} out of range")));
            }
            col.cards.insert(*position, card.clone());
            ws.cards.insert(
                card.clone(),
                Card {
                    id: card.clone(),
                    kind: *card_kind,
                    title: title.clone(),
                    description: description.clone(),
                    focus_id: focus.clone(),
                    origin_xtag: origin_xtag.clone(),
                    created_at: at,
                    started_at: None,
                    done_at: None,
                },
            );
            match card_kind {
                CardKind::Task => ws.counters.tasks += 1,
                CardKind::Xtag => ws.counters.xtags += 1,
                CardKind::ChangeTask => ws.counters.change_tasks += 1,
            }
        }
        Effect::CardMoved {
            card,
            from,
            to,
            position,
        } => {
            let board_id = ws
                .cards
                .get(card)
                .ok_or_else(|| bad(format!("unknown card {card}")))?
                .board_id();
            let board = ws
                .board_mut(&board_id)
                .ok_or_else(|| bad(format!("unknown board {board_id}")))?;
            let src = board
                .columns
                .iter_mut()
                .find(|c| &c.name == from)
                .ok_or_else(|| bad(format!("unknown column {from}")))?;
            let idx = src
                .cards
                .iter()
                .position(|c| c == card)
                .ok_or_else(|| bad(format!("card {card} not in column {from}")))?;
            src.cards.remove(idx);
            let dst = board
                .columns
                .iter_mut()
                .find(|c| &c.name == to)
                .ok_or_else(|| bad(format!("unknown column {to}")))?;
            if *position > dst.cards.len() {
                return Err(bad(format!("position {position} out of range")));
            }
            dst.cards.insert(*position, card.clone());
            let stage = dst.stage;
            let c = ws.cards.get_mut(card).expect("card checked above");
            match stage {
                Stage::Active if c.started_at.is_none() => c.started_at = Some(at),
                Stage::Done => c.done_at = Some(at),
                _ => {}
            }
        }
        Effect::MarkAdded {
            dev_card,
            xtag,
            note,
        } => {
            let kinds = (
                ws.cards.get(dev_card).map(|c| c.kind),
                ws.cards.get(xtag).map(|c| c.kind),
            );
            match kinds {
                (Some(d), Some(CardKind::Xtag)) if d.is_dev() => {}
                _ => return Err(bad(format!("mark ({dev_card}, {xtag}) has invalid endpoints"))),
            }
            if ws.has_mark(dev_card, xtag) {
                return Err(bad(format!("mark ({dev_card}, {xtag}) already exists")));
            }
            ws.marks.push(XMark {
                dev_card: dev_card.clone(),
                xtag: xtag.clone(),
                created_at: at,
                note: note.clone(),
            });
        }
        Effect::MarkRemoved { dev_card, xtag } => {
            let idx = ws
                .marks
                .iter()
                .position(|m| &m.dev_card == dev_card && &m.xtag == xtag)
                .ok_or_else(|| bad(format!("no mark ({dev_card}, {xtag})")))?;
            ws.marks.remove(idx);
        }
        Effect::FocusAdded {
            focus,
            name,
            columns,
        } => {
            if ws.counters.next_focus_id() != *focus {
                return Err(bad(format!("focus id {focus} out of sequence")));
            }
            check_columns(columns).map_err(|e| bad(e.to_string()))?;
            ws.focus_boards.push(FocusBoard {
                focus_name: name.clone(),
                board: Board::new(focus.clone(), name.clone(), columns),
                principles: Vec::new(),
            });
            ws.counters.focuses += 1;
        }
        Effect::PrincipleAdded {
            principle,
            focus,
            statement,
        } => {
            if ws.counters.next_principle_id() != *principle {
                return Err(bad(format!("principle id {principle} out of sequence")));
            }
            let f = ws
                .focus_mut(focus)
                .ok_or_else(|| bad(format!("unknown focus {focus}")))?;
            f.principles.push(Principle {
                id: principle.clone(),
                focus_id: focus.clone(),
                statement: statement.clone(),
                version: 1,
                revisions: vec![Revision {
                    version: 1,
                    statement: statement.clone(),
                    at,
                }],
                retired: false,
            });
            ws.counters.principles += 1;
        }
        Effect::PrincipleRevised {
            principle,
            version,
            statement,
        } => {
            let p = ws
                .principle_mut(principle)
                .ok_or_else(|| bad(format!("unknown principle {principle}")))?;
            if *version != p.version + 1 {
                return Err(bad(format!("principle {principle} revision out of sequence")));
            }
            p.version = *version;
            p.statement = statement.clone();
            p.revisions.push(Revision {
                version: *version,
                statement: statement.clone(),
                at,
            });
        }
        Effect::PrincipleRetired { principle } => {
            ws.principle_mut(principle)
                .ok_or_else(|| bad(format!("unknown principle {principle}")))?
                .retired = true;
        }
        Effect::PrincipleLinked { xtag, principle } => {
            if ws.principle(principle).is_none() {
                return Err(bad(format!("unknown principle {principle}")));
            }
            if ws.cards.get(xtag).map(|c| c.kind) != Some(CardKind::Xtag) {
                return Err(bad(format!("{xtag} is not an xtag")));
            }
            ws.principle_links.push(PrincipleLink {
                xtag: xtag.clone(),
                principle: principle.clone(),
            });
        }
        Effect::PolicySet {
            wip_policy,
            completion_policy,
        } => {
            ws.wip_policy = wip_policy.clone();
            ws.completion_policy = *completion_policy;
        }
    }
    Ok(())
}
