//! Traceability queries over marks, principle links and change provenance.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::ids::{CardId, PrincipleId};
use crate::metrics::QueryError;
use crate::model::{CardKind, Workspace};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TraceNode {
    Card {
        id: CardId,
        kind: CardKind,
        title: String,
    },
    Principle {
        id: PrincipleId,
        statement: String,
        retired: bool,
    },
}

impl TraceNode {
    pub fn id(&self) -> &str {
        match self {
            TraceNode::Card { id, .. } => id.as_str(),
            TraceNode::Principle { id, .. } => id.as_str(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    /// Development card to X-Tag.
    Mark,
    /// X-Tag to principle.
    Principle,
    /// Change task to the X-Tag that produced it.
    Provenance,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TraceEdge {
    pub kind: EdgeKind,
    pub from: String,
    pub to: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceGraph {
    pub root: CardId,
    /// In breadth-first discovery order, root first.
    pub nodes: Vec<TraceNode>,
    pub edges: Vec<TraceEdge>,
}

impl TraceGraph {
    pub fn contains(&self, id: &str) -> bool {
        self.nodes.iter().any(|n| n.id() == id)
    }

    pub fn has_edge(&self, kind: EdgeKind, from: &str, to: &str) -> bool {
        self.edges
            .iter()
            .any(|e| e.kind == kind && e.from == from && e.to == to)
    }
}

/// Everything connected to `card` through marks and provenance, with the
/// principles of every X-Tag reached. Principles are leaves: the walk does not
/// continue through a principle to other X-Tags that share it.
pub fn trace(ws: &Workspace, card: &CardId) -> Result<TraceGraph, QueryError> {
    if ws.card(card).is_none() {
        return Err(QueryError::UnknownCard(card.to_string()));
    }
    let mut seen_cards: BTreeSet<CardId> = BTreeSet::from([card.clone()]);
    let mut seen_principles: BTreeSet<PrincipleId> = BTreeSet::new();
    let mut nodes = Vec::new();
    let mut edges = BTreeSet::new();
    let mut queue = VecDeque::from([card.clone()]);

    while let Some(id) = queue.pop_front() {
        let c = &ws.cards[&id];
        nodes.push(TraceNode::Card {
            id: id.clone(),
            kind: c.kind,
            title: c.title.clone(),
        });
        let mut neighbours: Vec<CardId> = Vec::new();
        for m in &ws.marks {
            if m.dev_card == id {
                neighbours.push(m.xtag.clone());
            } else if m.xtag == id {
                neighbours.push(m.dev_card.clone());
            } else {
                continue;
            }
            edges.insert(TraceEdge {
                kind: EdgeKind::Mark,
                from: m.dev_card.to_string(),
                to: m.xtag.to_string(),
            });
        }
        if let Some(origin) = &c.origin_xtag {
            neighbours.push(origin.clone());
            edges.insert(TraceEdge {
                kind: EdgeKind::Provenance,
                from: id.to_string(),
                to: origin.to_string(),
            });
        }
        if c.kind == CardKind::Xtag {
            for other in ws.cards.values().filter(|o| o.origin_xtag.as_ref() == Some(&id)) {
                neighbours.push(other.id.clone());
                edges.insert(TraceEdge {
                    kind: EdgeKind::Provenance,
                    from: other.id.to_string(),
                    to: id.to_string(),
                });
            }
            for p in ws.principles_of(&id) {
                edges.insert(TraceEdge {
                    kind: EdgeKind::Principle,
                    from: id.to_string(),
                    to: p.to_string(),
                });
                if seen_principles.insert(p.clone()) {
                    if let Some(pr) = ws.principle(p) {
                        nodes.push(TraceNode::Principle {
                            id: p.clone(),
                            statement: pr.statement.clone(),
                            retired: pr.retired,
                        });
                    }
                }
            }
        }
        for n in neighbours {
            if seen_cards.insert(n.clone()) {
                queue.push_back(n);
            }
        }
    }

    Ok(TraceGraph {
        root: card.clone(),
        nodes,
        edges: edges.into_iter().collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrincipleUsage {
    pub xtag: CardId,
    pub dev_cards: Vec<CardId>,
}

/// Every X-Tag linked to the principle, with the development cards marked to it.
pub fn principle_usage(ws: &Workspace, principle: &PrincipleId) -> Result<Vec<PrincipleUsage>, QueryError> {
    if ws.principle(principle).is_none() {
        return Err(QueryError::UnknownPrinciple(principle.to_string()));
    }
    Ok(ws
        .principle_links
        .iter()
        .filter(|l| &l.principle == principle)
        .map(|l| PrincipleUsage {
            xtag: l.xtag.clone(),
            dev_cards: ws.dev_cards_of(&l.xtag).cloned().collect(),
        })
        .collect())
}
