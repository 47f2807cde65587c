//! Read-only analytics: focus coverage and flow metrics.
//!
//! All durations are in logical clock ticks.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::event::Event;
use crate::ids::{BoardId, CardId};
use crate::model::{CardKind, Stage, Workspace};
use crate::store::{replay_onto, StoreError};

#[derive(Debug, Error)]
pub enum QueryError {
    #[error("no focus {0}")]
    UnknownFocus(String),
    #[error("no card {0}")]
    UnknownCard(String),
    #[error("no principle {0}")]
    UnknownPrinciple(String),
    #[error("window must be at least one tick")]
    InvalidWindow,
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// Share of unfinished development-board cards carrying at least one mark
/// into `focus`. An empty board counts as fully covered.
pub fn coverage_ratio(ws: &Workspace, focus: &BoardId) -> Result<f64, QueryError> {
    if ws.focus(focus).is_none() {
        return Err(QueryError::UnknownFocus(focus.to_string()));
    }
    let live: Vec<&CardId> = ws
        .dev_board
        .columns
        .iter()
        .filter(|c| c.stage != Stage::Done)
        .flat_map(|c| c.cards.iter())
        .collect();
    if live.is_empty() {
        return Ok(1.0);
    }
    let covered = live
        .iter()
        .filter(|id| {
            ws.xtags_of(id)
                .any(|x| ws.card(x).and_then(|c| c.focus_id.as_ref()) == Some(focus))
        })
        .count();
    Ok(covered as f64 / live.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CardFlow {
    pub card: CardId,
    pub board: BoardId,
    pub kind: CardKind,
    pub created_at: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub started_at: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub done_at: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lead_time: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cycle_time: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Throughput {
    pub board: BoardId,
    /// Inclusive tick range.
    pub from_tick: u64,
    pub to_tick: u64,
    pub done: u64,
}

/// One point of the cumulative-flow series.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowPoint {
    pub tick: u64,
    pub board: BoardId,
    pub column: String,
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowMetrics {
    pub window: u64,
    pub cards: Vec<CardFlow>,
    pub throughput: Vec<Throughput>,
    /// One point per column per tick, from the base tick to the last event.
    pub cumulative_flow: Vec<FlowPoint>,
}

impl FlowMetrics {
    pub fn card(&self, id: &str) -> Option<&CardFlow> {
        self.cards.iter().find(|c| c.card.as_str() == id)
    }
}

fn column_counts(ws: &Workspace, tick: u64, out: &mut Vec<FlowPoint>) {
    for board in ws.boards() {
        for col in &board.columns {
            out.push(FlowPoint {
                tick,
                board: board.id.clone(),
                column: col.name.clone(),
                count: col.cards.len() as u64,
            });
        }
    }
}

/// Computes flow metrics by folding `events` onto `base`, which is either the
/// genesis workspace or a snapshot. Card and throughput figures depend only on
/// the final state; the cumulative-flow series covers `base.clock..=last seq`.
pub fn flow_metrics(base: &Workspace, events: &[Event], window: u64) -> Result<FlowMetrics, QueryError> {
    if window == 0 {
        return Err(QueryError::InvalidWindow);
    }
    let mut ws = base.clone();
    let mut cumulative_flow = Vec::new();
    column_counts(&ws, ws.clock, &mut cumulative_flow);
    for e in events {
        ws = replay_onto(ws, std::slice::from_ref(e))?;
        column_counts(&ws, ws.clock, &mut cumulative_flow);
    }

    let cards: Vec<CardFlow> = ws
        .cards
        .values()
        .map(|c| CardFlow {
            card: c.id.clone(),
            board: c.board_id(),
            kind: c.kind,
            created_at: c.created_at,
            started_at: c.started_at,
            done_at: c.done_at,
            lead_time: c.done_at.map(|d| d - c.created_at),
            cycle_time: c.done_at.zip(c.started_at).map(|(d, s)| d - s),
        })
        .collect();

    let buckets = ws.clock.div_ceil(window).max(1);
    let mut done: BTreeMap<(BoardId, u64), u64> = BTreeMap::new();
    for c in &cards {
        if let Some(d) = c.done_at {
            *done.entry((c.board.clone(), (d - 1) / window)).or_default() += 1;
        }
    }
    let mut throughput = Vec::new();
    for board in ws.boards() {
        for k in 0..buckets {
            throughput.push(Throughput {
                board: board.id.clone(),
                from_tick: k * window + 1,
                to_tick: (k + 1) * window,
                done: done.get(&(board.id.clone(), k)).copied().unwrap_or(0),
            });
        }
    }

    Ok(FlowMetrics {
        window,
        cards,
        throughput,
        cumulative_flow,
    })
}

/// Plot-ready cumulative flow: `tick,board,column,count` rows with a header.
pub fn cumulative_flow_csv(metrics: &FlowMetrics) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["tick", "board", "column", "count"]).expect("in-memory write");
    for p in &metrics.cumulative_flow {
        w.write_record([
            p.tick.to_string(),
            p.board.to_string(),
            p.column.clone(),
            p.count.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

/// Fixed-width text table of per-card lead and cycle times.
pub fn card_table(metrics: &FlowMetrics) -> String {
    let dash = |v: Option<u64>| v.map_or_else(|| "-".to_owned(), |v| v.to_string());
    let mut out = format!(
        "{:<8} {:<6} {:<12} {:>7} {:>7} {:>7} {:>5} {:>6}\n",
        "card", "board", "kind", "created", "started", "done", "lead", "cycle"
    );
    for c in &metrics.cards {
        out.push_str(&format!(
            "{:<8} {:<6} {:<12} {:>7} {:>7} {:>7} {:>5} {:>6}\n",
            c.card.as_str(),
            c.board.as_str(),
            c.kind.as_str(),
            c.created_at,
            dash(c.started_at),
            dash(c.done_at),
            dash(c.lead_time),
            dash(c.cycle_time),
        ));
    }
    out
}
