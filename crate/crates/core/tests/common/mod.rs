#![allow(dead_code)]

use kanbanx_core::{
    execute, ChangeSpec, Command, CompletionPolicy, Event, WipPolicy, Workspace, WorkspaceConfig,
};
use proptest::prelude::*;

/// Abstract operation; the small integers pick among whatever ids exist when
/// the op is turned into a command, so most generated commands are plausible.
#[derive(Clone, Debug)]
pub enum Op {
    Task,
    Focus(u8, u8),
    Principle(u8),
    Revise(u8),
    Retire(u8),
    Extract(u8, u8, u8),
    Link(u8, u8),
    Unlink(u8),
    Start(u8),
    Move(u8, u8),
    CompleteXtag(u8, u8),
    CompleteTask(u8),
    Policy(u8, bool),
}

pub fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        3 => Just(Op::Task),
        1 => (any::<u8>(), 1u8..3).prop_map(|(n, p)| Op::Focus(n, p)),
        1 => any::<u8>().prop_map(Op::Principle),
        1 => any::<u8>().prop_map(Op::Revise),
        1 => any::<u8>().prop_map(Op::Retire),
        4 => (any::<u8>(), any::<u8>(), any::<u8>()).prop_map(|(a, b, c)| Op::Extract(a, b, c)),
        2 => (any::<u8>(), any::<u8>()).prop_map(|(a, b)| Op::Link(a, b)),
        1 => any::<u8>().prop_map(Op::Unlink),
        4 => any::<u8>().prop_map(Op::Start),
        3 => (any::<u8>(), any::<u8>()).prop_map(|(a, b)| Op::Move(a, b)),
        3 => (any::<u8>(), 0u8..4).prop_map(|(a, n)| Op::CompleteXtag(a, n)),
        3 => any::<u8>().prop_map(Op::CompleteTask),
        1 => (1u8..6, any::<bool>()).prop_map(|(l, s)| Op::Policy(l, s)),
    ]
}

pub fn genesis(limit: u32, strict: bool) -> WorkspaceConfig {
    let policy = if strict { CompletionPolicy::Strict } else { CompletionPolicy::Warn };
    WorkspaceConfig::new("prop", "prop", WipPolicy::shared(limit), policy)
}

fn pick<T: Clone>(items: &[T], i: u8) -> Option<T> {
    (!items.is_empty()).then(|| items[i as usize % items.len()].clone())
}

const FOCUS_NAMES: [&str; 3] = ["Security", "Sustainability", "Performance"];

pub fn to_command(ws: &Workspace, op: &Op) -> Option<Command> {
    let dev: Vec<_> = ws.cards.values().filter(|c| c.kind.is_dev()).map(|c| c.id.clone()).collect();
    let tags: Vec<_> = ws.cards.values().filter(|c| !c.kind.is_dev()).map(|c| c.id.clone()).collect();
    let focuses: Vec<_> = ws.focus_boards.iter().map(|f| f.id().clone()).collect();
    let principles: Vec<_> = ws
        .focus_boards
        .iter()
        .flat_map(|f| f.principles.iter().map(|p| p.id.clone()))
        .collect();
    Some(match *op {
        Op::Task => Command::create_task(format!("task {}", ws.counters.tasks + 1)),
        Op::Focus(n, p) => Command::add_focus(
            FOCUS_NAMES[n as usize % 3],
            (0..p).map(|i| format!("principle {i}")),
        ),
        Op::Principle(f) => Command::AddPrinciple {
            focus: pick(&focuses, f)?,
            statement: "extra".into(),
        },
        Op::Revise(p) => Command::RevisePrinciple {
            principle: pick(&principles, p)?,
            statement: "revised".into(),
        },
        Op::Retire(p) => Command::RetirePrinciple {
            principle: pick(&principles, p)?,
        },
        Op::Extract(t, f, p) => {
            let focus = pick(&focuses, f)?;
            let own: Vec<_> = ws.focus(&focus)?.principles.iter().map(|p| p.id.clone()).collect();
            Command::extract_xtag(pick(&dev, t)?, focus, "tag", [pick(&own, p)?])
        }
        Op::Link(t, x) => Command::link_mark(pick(&dev, t)?, pick(&tags, x)?),
        Op::Unlink(m) => {
            let mark = pick(&ws.marks, m)?;
            Command::UnlinkMark { dev_card: mark.dev_card, xtag: mark.xtag }
        }
        Op::Start(t) => Command::start_task(pick(&dev, t)?),
        Op::Move(c, col) => {
            let all: Vec<_> = ws.cards.keys().cloned().collect();
            let card = pick(&all, c)?;
            let board = ws.board(&ws.card(&card)?.board_id())?;
            let names: Vec<_> = board.columns.iter().map(|c| c.name.clone()).collect();
            Command::move_card(card, pick(&names, col)?)
        }
        Op::CompleteXtag(x, n) => Command::complete_xtag(
            pick(&tags, x)?,
            (0..n).map(|i| ChangeSpec::new(format!("change {i}"), "")).collect(),
        ),
        Op::CompleteTask(t) => Command::complete_task(pick(&dev, t)?),
        Op::Policy(limit, strict) => Command::SetPolicy {
            wip_policy: WipPolicy::shared(limit as u32),
            completion_policy: if strict { CompletionPolicy::Strict } else { CompletionPolicy::Warn },
        },
    })
}

/// Runs the ops, calling `check` after every command with
/// (pre-state, command, result, post-state).
pub fn drive(
    config: &WorkspaceConfig,
    ops: &[Op],
    mut check: impl FnMut(&Workspace, &Command, &kanbanx_core::TransitionResult, &Workspace),
) -> (Workspace, Vec<Event>) {
    let mut ws = Workspace::new(config).unwrap();
    let mut events = Vec::new();
    for op in ops {
        let Some(cmd) = to_command(&ws, op) else { continue };
        let before = ws.clone();
        let result = execute(&mut ws, &cmd, None);
        check(&before, &cmd, &result, &ws);
        events.extend(result.events);
    }
    (ws, events)
}
