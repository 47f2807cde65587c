//! Brute-force reference for command verdicts.
//!
//! Written against the raw workspace fields only: every question is answered
//! by scanning boards, cards, marks and principles from scratch. Nothing here
//! calls the engine or the query helpers on `Workspace`.

use std::collections::{BTreeMap, BTreeSet};

use kanbanx_core::{
    Board, CardKind, ChangeSpec, ColumnSpec, Command, CompletionPolicy, Stage, WipPolicy,
    Workspace,
};

/// What the reference expects a command to do.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    /// `None` when the command should be accepted.
    pub rule: Option<&'static str>,
    /// Stage of every card afterwards, including new ones; empty on rejection.
    pub stages: BTreeMap<String, Stage>,
}

impl Verdict {
    pub fn accepted(&self) -> bool {
        self.rule.is_none()
    }
}

/// Stage of every card in `ws`, read from the column layout.
pub fn stages(ws: &Workspace) -> BTreeMap<String, Stage> {
    let mut out = BTreeMap::new();
    for board in all_boards(ws) {
        for col in &board.columns {
            for id in &col.cards {
                out.insert(id.as_str().to_owned(), col.stage);
            }
        }
    }
    out
}

fn all_boards(ws: &Workspace) -> Vec<&Board> {
    let mut v = vec![&ws.dev_board];
    v.extend(ws.focus_boards.iter().map(|f| &f.board));
    v
}

fn blank(s: &str) -> bool {
    s.chars().all(char::is_whitespace)
}

fn kind(ws: &Workspace, id: &str) -> Option<CardKind> {
    ws.cards.values().find(|c| c.id.as_str() == id).map(|c| c.kind)
}

fn is_dev(k: Option<CardKind>) -> bool {
    matches!(k, Some(CardKind::Task) | Some(CardKind::ChangeTask))
}

/// Board holding the card, found by scanning every column.
fn board_of<'a>(ws: &'a Workspace, id: &str) -> Option<&'a Board> {
    all_boards(ws)
        .into_iter()
        .find(|b| b.columns.iter().any(|c| c.cards.iter().any(|x| x.as_str() == id)))
}

fn tags_of(ws: &Workspace, dev: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for m in &ws.marks {
        if m.dev_card.as_str() == dev && !out.iter().any(|x| x == m.xtag.as_str()) {
            out.push(m.xtag.as_str().to_owned());
        }
    }
    out
}

fn active_on(board: &Board) -> usize {
    board
        .columns
        .iter()
        .filter(|c| c.stage == Stage::Active)
        .map(|c| c.cards.len())
        .sum()
}

fn active_total(ws: &Workspace) -> usize {
    all_boards(ws).into_iter().map(active_on).sum()
}

/// Would `extra` more active cards per board still fit every limit?
fn fits(ws: &Workspace, extra: &BTreeMap<String, usize>) -> bool {
    let total: usize = extra.values().sum();
    if active_total(ws) + total > ws.wip_policy.shared_limit as usize {
        return false;
    }
    extra.iter().all(|(board, n)| {
        let cap = ws
            .wip_policy
            .per_board_limits
            .iter()
            .find(|(b, _)| b.as_str() == board)
            .map(|(_, c)| *c as usize);
        match cap {
            None => true,
            Some(cap) => {
                let used = all_boards(ws)
                    .into_iter()
                    .find(|b| b.id.as_str() == board)
                    .map_or(0, active_on);
                used + n <= cap
            }
        }
    })
}

fn principle<'a>(ws: &'a Workspace, id: &str) -> Option<(&'a str, bool)> {
    for f in &ws.focus_boards {
        for p in &f.principles {
            if p.id.as_str() == id {
                return Some((f.board.id.as_str(), p.retired));
            }
        }
    }
    None
}

fn columns_ok(cols: &[ColumnSpec]) -> bool {
    let names: BTreeSet<&str> = cols.iter().map(|c| c.name.as_str()).collect();
    names.len() == cols.len()
        && cols.iter().all(|c| !blank(&c.name))
        && [Stage::Queue, Stage::Active, Stage::Done]
            .iter()
            .all(|s| cols.iter().any(|c| c.stage == *s))
}

fn policy_ok(ws: &Workspace, p: &WipPolicy) -> Result<(), &'static str> {
    if p.shared_limit == 0 {
        return Err("InvalidPolicy");
    }
    for (board, cap) in &p.per_board_limits {
        if *cap == 0 || *cap > p.shared_limit {
            return Err("InvalidPolicy");
        }
        if !all_boards(ws).iter().any(|b| b.id == *board) {
            return Err("InvalidPolicy");
        }
    }
    if active_total(ws) > p.shared_limit as usize {
        return Err("WipExceeded");
    }
    for (board, cap) in &p.per_board_limits {
        let used = all_boards(ws).into_iter().find(|b| b.id == *board).map_or(0, active_on);
        if used > *cap as usize {
            return Err("WipExceeded");
        }
    }
    Ok(())
}

fn count_kind(ws: &Workspace, k: CardKind) -> usize {
    ws.cards.values().filter(|c| c.kind == k).count()
}

/// Starting a development card: the card plus each queued linked tag.
fn start_load(ws: &Workspace, st: &BTreeMap<String, Stage>, dev: &str) -> (BTreeMap<String, usize>, Vec<String>) {
    let mut extra = BTreeMap::from([("dev".to_owned(), 1usize)]);
    let mut tags = Vec::new();
    for x in tags_of(ws, dev) {
        if st.get(&x) == Some(&Stage::Queue) {
            let b = board_of(ws, &x).expect("tag is placed").id.as_str().to_owned();
            *extra.entry(b).or_default() += 1;
            tags.push(x);
        }
    }
    (extra, tags)
}

/// Unfinished linked tags block completion under the strict policy only.
fn gate_blocks(ws: &Workspace, st: &BTreeMap<String, Stage>, dev: &str) -> bool {
    ws.completion_policy == CompletionPolicy::Strict
        && tags_of(ws, dev).iter().any(|x| st.get(x) != Some(&Stage::Done))
}

/// Reference verdict for `cmd` against `ws`.
pub fn judge(ws: &Workspace, cmd: &Command) -> Verdict {
    let mut st = stages(ws);
    let rule = judge_into(ws, cmd, &mut st).err();
    if rule.is_some() {
        st.clear();
    }
    Verdict { rule, stages: st }
}

fn judge_into(ws: &Workspace, cmd: &Command, st: &mut BTreeMap<String, Stage>) -> Result<(), &'static str> {
    match cmd {
        Command::CreateTask { title, .. } => {
            if blank(title) {
                return Err("EmptyTitle");
            }
            st.insert(format!("T{}", count_kind(ws, CardKind::Task) + 1), Stage::Queue);
        }
        Command::AddFocus { name, principles, columns } => {
            if blank(name) {
                return Err("EmptyTitle");
            }
            let lower = name.trim().to_ascii_lowercase();
            if ws.focus_boards.iter().any(|f| f.focus_name.to_ascii_lowercase() == lower) {
                return Err("DuplicateFocus");
            }
            if principles.is_empty() || principles.iter().any(|p| blank(p)) {
                return Err("NoPrinciples");
            }
            if columns.as_deref().is_some_and(|c| !columns_ok(c)) {
                return Err("InvalidColumns");
            }
        }
        Command::AddPrinciple { focus, statement } => {
            if !ws.focus_boards.iter().any(|f| f.board.id == *focus) {
                return Err("UnknownFocus");
            }
            if blank(statement) {
                return Err("EmptyTitle");
            }
        }
        Command::RevisePrinciple { principle: p, statement } => {
            match principle(ws, p.as_str()) {
                None => return Err("UnknownPrinciple"),
                Some((_, true)) => return Err("PrincipleRetired"),
                _ => {}
            }
            if blank(statement) {
                return Err("EmptyTitle");
            }
        }
        Command::RetirePrinciple { principle: p } => {
            match principle(ws, p.as_str()) {
                None => return Err("UnknownPrinciple"),
                Some((_, true)) => return Err("PrincipleRetired"),
                _ => {}
            }
            for link in ws.principle_links.iter().filter(|l| l.principle == *p) {
                if st.get(link.xtag.as_str()) == Some(&Stage::Done) {
                    continue;
                }
                let other_live = ws.principle_links.iter().any(|o| {
                    o.xtag == link.xtag
                        && o.principle != *p
                        && principle(ws, o.principle.as_str()).is_some_and(|(_, retired)| !retired)
                });
                if !other_live {
                    return Err("RetireWouldOrphan");
                }
            }
        }
        Command::ExtractXtag { task, focus, title, principles, .. } => {
            let k = kind(ws, task.as_str());
            if k.is_none() {
                return Err("UnknownTask");
            }
            if !is_dev(k) {
                return Err("WrongKind");
            }
            if st.get(task.as_str()) == Some(&Stage::Done) {
                return Err("TaskAlreadyDone");
            }
            if !ws.focus_boards.iter().any(|f| f.board.id == *focus) {
                return Err("UnknownFocus");
            }
            if blank(title) {
                return Err("EmptyTitle");
            }
            if principles.is_empty() {
                return Err("MissingPrinciple");
            }
            for p in principles {
                match principle(ws, p.as_str()) {
                    Some((f, false)) if f == focus.as_str() => {}
                    _ => return Err("MissingPrinciple"),
                }
            }
            st.insert(format!("X{}", count_kind(ws, CardKind::Xtag) + 1), Stage::Queue);
        }
        Command::LinkMark { dev_card, xtag, .. } => {
            let dk = kind(ws, dev_card.as_str());
            if dk.is_none() {
                return Err("UnknownCard");
            }
            if !is_dev(dk) {
                return Err("WrongKind");
            }
            match kind(ws, xtag.as_str()) {
                None => return Err("UnknownCard"),
                Some(CardKind::Xtag) => {}
                Some(_) => return Err("WrongKind"),
            }
            if ws.marks.iter().any(|m| m.dev_card == *dev_card && m.xtag == *xtag) {
                return Err("DuplicateMark");
            }
            if st.get(dev_card.as_str()) == Some(&Stage::Done) {
                return Err("TaskAlreadyDone");
            }
            if st.get(dev_card.as_str()) == Some(&Stage::Active) && st.get(xtag.as_str()) == Some(&Stage::Queue) {
                let b = board_of(ws, xtag.as_str()).expect("placed").id.as_str().to_owned();
                if !fits(ws, &BTreeMap::from([(b, 1)])) {
                    return Err("WipExceeded");
                }
                st.insert(xtag.as_str().to_owned(), Stage::Active);
            }
        }
        Command::UnlinkMark { dev_card, xtag } => {
            if !ws.marks.iter().any(|m| m.dev_card == *dev_card && m.xtag == *xtag) {
                return Err("UnknownMark");
            }
            let origin = ws
                .cards
                .values()
                .find(|c| c.id == *dev_card)
                .and_then(|c| c.origin_xtag.as_ref());
            if origin == Some(xtag) {
                return Err("ProvenanceMark");
            }
        }
        Command::StartTask { task } => {
            let k = kind(ws, task.as_str());
            if k.is_none() {
                return Err("UnknownTask");
            }
            if !is_dev(k) {
                return Err("WrongKind");
            }
            if st.get(task.as_str()) != Some(&Stage::Queue) {
                return Err("NotQueued");
            }
            let (extra, tags) = start_load(ws, st, task.as_str());
            if !fits(ws, &extra) {
                return Err("WipExceeded");
            }
            st.insert(task.as_str().to_owned(), Stage::Active);
            for x in tags {
                st.insert(x, Stage::Active);
            }
        }
        Command::MoveCard { card, column } => {
            let Some(k) = kind(ws, card.as_str()) else {
                return Err("UnknownCard");
            };
            let from = st[card.as_str()];
            if from == Stage::Done {
                return Err("CardDone");
            }
            let board = board_of(ws, card.as_str()).expect("placed");
            let Some(to) = board.columns.iter().find(|c| c.name == *column).map(|c| c.stage) else {
                return Err("UnknownColumn");
            };
            match to {
                Stage::Done if k == CardKind::Xtag => return Err("DirectXtagDone"),
                Stage::Done => {
                    if gate_blocks(ws, st, card.as_str()) {
                        return Err("GateBlocked");
                    }
                }
                Stage::Active if from != Stage::Active => {
                    if k == CardKind::Xtag {
                        if !fits(ws, &BTreeMap::from([(board.id.as_str().to_owned(), 1)])) {
                            return Err("WipExceeded");
                        }
                    } else {
                        let (extra, tags) = start_load(ws, st, card.as_str());
                        if !fits(ws, &extra) {
                            return Err("WipExceeded");
                        }
                        for x in tags {
                            st.insert(x, Stage::Active);
                        }
                    }
                }
                _ => {}
            }
            st.insert(card.as_str().to_owned(), to);
        }
        Command::CompleteXtag { xtag, changes } => {
            match kind(ws, xtag.as_str()) {
                None => return Err("UnknownXtag"),
                Some(CardKind::Xtag) => {}
                Some(_) => return Err("WrongKind"),
            }
            if st.get(xtag.as_str()) != Some(&Stage::Active) {
                return Err("NotActive");
            }
            if changes.iter().any(|c: &ChangeSpec| blank(&c.title)) {
                return Err("EmptyTitle");
            }
            st.insert(xtag.as_str().to_owned(), Stage::Done);
            let base = count_kind(ws, CardKind::ChangeTask);
            for i in 0..changes.len() {
                st.insert(format!("C{}", base + i + 1), Stage::Queue);
            }
        }
        Command::CompleteTask { task } => {
            let k = kind(ws, task.as_str());
            if k.is_none() {
                return Err("UnknownTask");
            }
            if !is_dev(k) {
                return Err("WrongKind");
            }
            if st.get(task.as_str()) != Some(&Stage::Active) {
                return Err("NotActive");
            }
            if gate_blocks(ws, st, task.as_str()) {
                return Err("GateBlocked");
            }
            st.insert(task.as_str().to_owned(), Stage::Done);
        }
        Command::SetPolicy { wip_policy, .. } => policy_ok(ws, wip_policy)?,
    }
    Ok(())
}
