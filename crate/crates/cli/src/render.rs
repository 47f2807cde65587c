//! Human-readable text for the terminal.

use std::fmt::Write as _;

use kanbanx_core::trace::{EdgeKind, TraceGraph, TraceNode};
use kanbanx_core::{Board, Card, CardKind, Effect, Workspace};

pub fn effect_line(effect: &Effect) -> String {
    match effect {
        Effect::CardCreated {
            card,
            card_kind,
            title,
            board,
            column,
            ..
        } => format!("created {card} ({}) \"{title}\" in {board}/{column}", card_kind.as_str()),
        Effect::CardMoved { card, from, to, .. } => format!("moved {card}: {from} -> {to}"),
        Effect::MarkAdded { dev_card, xtag, .. } => format!("linked {dev_card} -> {xtag}"),
        Effect::MarkRemoved { dev_card, xtag } => format!("unlinked {dev_card} -> {xtag}"),
        Effect::FocusAdded { focus, name, .. } => format!("added focus {focus} \"{name}\""),
        Effect::PrincipleAdded {
            principle,
            focus,
            statement,
        } => format!("added principle {principle} to {focus}: {statement}"),
        Effect::PrincipleRevised {
            principle, version, ..
        } => format!("revised {principle} to v{version}"),
        Effect::PrincipleRetired { principle } => format!("retired {principle}"),
        Effect::PrincipleLinked { xtag, principle } => format!("{xtag} cites {principle}"),
        Effect::PolicySet {
            wip_policy,
            completion_policy,
        } => {
            let mut s = format!(
                "policy: shared WIP {}, completion {}",
                wip_policy.shared_limit,
                completion_policy.as_str()
            );
            for (board, limit) in &wip_policy.per_board_limits {
                let _ = write!(s, ", {board} cap {limit}");
            }
            s
        }
    }
}

fn card_line(ws: &Workspace, card: &Card) -> String {
    let mut line = format!("    {:<5} {}", card.id.as_str(), card.title);
    if card.kind.is_dev() {
        let tags: Vec<&str> = ws.xtags_of(&card.id).map(|x| x.as_str()).collect();
        if !tags.is_empty() {
            let _ = write!(line, "  [{}]", tags.join(" "));
        }
        if let Some(origin) = &card.origin_xtag {
            let _ = write!(line, "  (from {origin})");
        }
    } else {
        let parents: Vec<&str> = ws.dev_cards_of(&card.id).map(|t| t.as_str()).collect();
        if !parents.is_empty() {
            let _ = write!(line, "  <- {}", parents.join(" "));
        }
        let chips: Vec<&str> = ws.principles_of(&card.id).map(|p| p.as_str()).collect();
        let _ = write!(line, "  {{{}}}", chips.join(" "));
    }
    line
}

fn board_block(ws: &Workspace, board: &Board, out: &mut String) {
    for col in &board.columns {
        let _ = writeln!(out, "  {} ({})", col.name, col.cards.len());
        for id in &col.cards {
            if let Some(card) = ws.card(id) {
                let _ = writeln!(out, "{}", card_line(ws, card));
            }
        }
    }
}

/// Every board, development first, with mark references on each card and
/// principle chips on each X-Tag.
pub fn board(ws: &Workspace) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} (clock {})  WIP {}/{}  completion {}",
        ws.name,
        ws.clock,
        ws.active_count(),
        ws.wip_policy.shared_limit,
        ws.completion_policy.as_str()
    );
    let _ = writeln!(out);
    let _ = writeln!(out, "{} [{}]", ws.dev_board.name, ws.dev_board.id);
    board_block(ws, &ws.dev_board, &mut out);
    for f in &ws.focus_boards {
        let _ = writeln!(out);
        let _ = writeln!(out, "{} [{}]", f.focus_name, f.id());
        for p in &f.principles {
            let state = if p.retired { " (retired)" } else { "" };
            let _ = writeln!(out, "  * {} v{}{}: {}", p.id, p.version, state, p.statement);
        }
        board_block(ws, &f.board, &mut out);
    }
    out
}

pub fn focus_list(ws: &Workspace) -> String {
    let mut out = String::new();
    for f in &ws.focus_boards {
        let live = f.principles.iter().filter(|p| !p.retired).count();
        let noun = if live == 1 { "principle" } else { "principles" };
        let _ = writeln!(out, "{:<4} {}  ({live} {noun})", f.id().as_str(), f.focus_name);
        for p in f.principles.iter().filter(|p| !p.retired) {
            let _ = writeln!(out, "     {} {}", p.id, p.statement);
        }
    }
    out
}

pub fn trace(graph: &TraceGraph) -> String {
    let mut out = format!("trace of {}\n", graph.root);
    for node in &graph.nodes {
        let line = match node {
            TraceNode::Card { id, kind, title } => {
                let kind = match kind {
                    CardKind::Task => "task",
                    CardKind::Xtag => "xtag",
                    CardKind::ChangeTask => "change",
                };
                format!("  {:<5} {kind:<7} {title}", id.as_str())
            }
            TraceNode::Principle { id, statement, retired } => {
                let state = if *retired { " (retired)" } else { "" };
                format!("  {:<5} {:<7} {statement}{state}", id.as_str(), "rule")
            }
        };
        let _ = writeln!(out, "{line}");
    }
    for e in &graph.edges {
        let kind = match e.kind {
            EdgeKind::Mark => "mark",
            EdgeKind::Principle => "cites",
            EdgeKind::Provenance => "from",
        };
        let _ = writeln!(out, "  {} -{kind}-> {}", e.from, e.to);
    }
    out
}
