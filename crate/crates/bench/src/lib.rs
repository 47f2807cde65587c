//! Deterministic workloads for the benchmarks.

use kanbanx_core::{
    execute, ChangeSpec, Command, CompletionPolicy, Event, WipPolicy, Workspace, WorkspaceConfig,
};

pub fn config(limit: u32) -> WorkspaceConfig {
    WorkspaceConfig::new("bench", "bench", WipPolicy::shared(limit), CompletionPolicy::Strict)
}

/// Commands for `rounds` full cycles over two focus boards: create a task,
/// extract one X-Tag per focus, start, finish both tags with one change task
/// each, then finish the task. Every command is accepted.
pub fn workflow(rounds: usize) -> Vec<Command> {
    let mut cmds = vec![
        Command::add_focus("Security", ["Risk", "Vulnerabilities"]),
        Command::add_focus("Sustainability", ["Ownership", "Debt", "Maintenance"]),
    ];
    let mut xtags = 0;
    for r in 1..=rounds {
        let task = format!("T{r}");
        cmds.push(Command::create_task(format!("story {r}")));
        cmds.push(Command::extract_xtag(task.as_str(), "F1", "assess", ["P1"]));
        cmds.push(Command::extract_xtag(task.as_str(), "F2", "refactor", ["P4"]));
        cmds.push(Command::start_task(task.as_str()));
        for _ in 0..2 {
            xtags += 1;
            cmds.push(Command::complete_xtag(
                format!("X{xtags}"),
                vec![ChangeSpec::new(format!("follow-up {xtags}"), "")],
            ));
        }
        cmds.push(Command::complete_task(task.as_str()));
    }
    cmds
}

/// Applies `cmds` and returns the final workspace and its log.
pub fn run(config: &WorkspaceConfig, cmds: &[Command]) -> (Workspace, Vec<Event>) {
    let mut ws = Workspace::new(config).expect("valid config");
    let mut events = Vec::with_capacity(cmds.len());
    for c in cmds {
        let r = execute(&mut ws, c, None);
        assert!(r.accepted, "{c:?}: {:?}", r.rejection);
        events.extend(r.events);
    }
    (ws, events)
}
