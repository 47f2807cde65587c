use kanbanx_core::model::Stage;
use kanbanx_core::{
    execute, new_workspace, validate, ChangeSpec, CardId, Command, CompletionPolicy, Rule,
    TransitionResult, WipPolicy, Workspace,
};

fn ws(limit: u32, policy: CompletionPolicy) -> Workspace {
    new_workspace("demo", WipPolicy::shared(limit), policy).unwrap()
}

fn ok(ws: &mut Workspace, cmd: Command) -> TransitionResult {
    let r = execute(ws, &cmd, None);
    assert!(r.accepted, "{cmd:?} rejected: {:?}", r.rejection);
    assert!(validate(ws).ok, "{:?}", validate(ws).violations);
    r
}

fn rejected(ws: &mut Workspace, cmd: Command) -> Rule {
    let before = ws.checksum();
    let r = execute(ws, &cmd, None);
    assert!(!r.accepted, "{cmd:?} unexpectedly accepted");
    assert!(r.events.is_empty());
    assert_eq!(before, ws.checksum(), "rejected command changed the workspace");
    r.rule().unwrap()
}

fn column(ws: &Workspace, board: &str, name: &str) -> Vec<String> {
    ws.board(&board.into())
        .unwrap()
        .column(name)
        .unwrap()
        .cards
        .iter()
        .map(|c| c.to_string())
        .collect()
}

fn active(ws: &Workspace) -> Vec<String> {
    let mut ids: Vec<String> = ws
        .boards()
        .flat_map(|b| b.columns.iter())
        .filter(|c| c.stage == Stage::Active)
        .flat_map(|c| c.cards.iter().map(|x| x.to_string()))
        .collect();
    ids.sort();
    ids
}

/// One task, a Security focus with one principle, and `tags` X-Tags on T1.
fn security(limit: u32, policy: CompletionPolicy, tags: usize) -> Workspace {
    let mut w = ws(limit, policy);
    ok(&mut w, Command::create_task("Upload survey results"));
    ok(&mut w, Command::add_focus("Security", ["Assess risk and vulnerabilities"]));
    for i in 0..tags {
        ok(&mut w, Command::extract_xtag("T1", "F1", format!("tag {i}"), ["P1"]));
    }
    w
}

#[test]
fn create_task_appends_to_backlog() {
    let mut w = ws(3, CompletionPolicy::Strict);
    ok(&mut w, Command::create_task("Upload survey results"));
    assert_eq!(column(&w, "dev", "Backlog"), ["T1"]);
    ok(&mut w, Command::create_task("b"));
    ok(&mut w, Command::create_task("c"));
    assert_eq!(column(&w, "dev", "Backlog")[2], "T3");
    assert_eq!(rejected(&mut w, Command::create_task("")), Rule::EmptyTitle);
    assert_eq!(rejected(&mut w, Command::create_task("   ")), Rule::EmptyTitle);
}

#[test]
fn add_focus_stacks_boards() {
    let mut w = ws(3, CompletionPolicy::Strict);
    ok(&mut w, Command::add_focus("Security", ["Assess risk and vulnerabilities"]));
    assert_eq!(w.boards().count(), 2);
    assert_eq!(
        rejected(&mut w, Command::add_focus("Security", ["x"])),
        Rule::DuplicateFocus
    );
    assert_eq!(
        rejected(&mut w, Command::add_focus("Other", Vec::<String>::new())),
        Rule::NoPrinciples
    );
    ok(&mut w, Command::add_focus("Sustainability", ["Team Code Ownership"]));
    ok(&mut w, Command::add_focus("Performance", ["Purpose"]));
    assert_eq!(w.boards().count(), 4);

    // A task may carry tags from different focus boards.
    ok(&mut w, Command::create_task("t"));
    ok(&mut w, Command::extract_xtag("T1", "F2", "a", ["P2"]));
    ok(&mut w, Command::extract_xtag("T1", "F3", "b", ["P3"]));
    let tags: Vec<_> = w.xtags_of(&"T1".into()).cloned().collect();
    assert_eq!(tags, [CardId::from("X1"), CardId::from("X2")]);
}

#[test]
fn extract_xtag_marks_and_links() {
    let mut w = security(3, CompletionPolicy::Strict, 0);
    ok(&mut w, Command::extract_xtag("T1", "F1", "Assess injection risk", ["P1"]));
    assert_eq!(column(&w, "F1", "Backlog"), ["X1"]);
    assert_eq!(w.marks.len(), 1);
    assert!(w.has_mark(&"T1".into(), &"X1".into()));

    ok(&mut w, Command::extract_xtag("T1", "F1", "Audit data retention", ["P1"]));
    let tags: Vec<_> = w.xtags_of(&"T1".into()).map(|c| c.to_string()).collect();
    assert_eq!(tags, ["X1", "X2"]);

    let none: [&str; 0] = [];
    assert_eq!(
        rejected(&mut w, Command::extract_xtag("T1", "F1", "x", none)),
        Rule::MissingPrinciple
    );
    assert_eq!(
        rejected(&mut w, Command::extract_xtag("T9", "F1", "x", ["P1"])),
        Rule::UnknownTask
    );
    assert_eq!(
        rejected(&mut w, Command::extract_xtag("T1", "F9", "x", ["P1"])),
        Rule::UnknownFocus
    );
    ok(&mut w, Command::add_focus("Performance", ["Purpose"]));
    assert_eq!(
        rejected(&mut w, Command::extract_xtag("T1", "F1", "x", ["P2"])),
        Rule::MissingPrinciple,
        "foreign principle"
    );
}

#[test]
fn extract_from_done_task_is_rejected() {
    let mut w = security(3, CompletionPolicy::Strict, 0);
    ok(&mut w, Command::start_task("T1"));
    ok(&mut w, Command::complete_task("T1"));
    assert_eq!(
        rejected(&mut w, Command::extract_xtag("T1", "F1", "x", ["P1"])),
        Rule::TaskAlreadyDone
    );
}

#[test]
fn link_mark_is_many_to_many() {
    let mut w = security(3, CompletionPolicy::Strict, 1);
    ok(&mut w, Command::create_task("second"));
    ok(&mut w, Command::link_mark("T2", "X1"));
    let devs: Vec<_> = w.dev_cards_of(&"X1".into()).map(|c| c.to_string()).collect();
    assert_eq!(devs, ["T1", "T2"]);
    assert_eq!(rejected(&mut w, Command::link_mark("T2", "X1")), Rule::DuplicateMark);
    assert_eq!(rejected(&mut w, Command::link_mark("X1", "T2")), Rule::WrongKind);
    assert_eq!(rejected(&mut w, Command::link_mark("T7", "X1")), Rule::UnknownCard);
}

#[test]
fn link_mark_co_starts_under_wip() {
    // T1 active with one tag; another queued tag; limit saturated.
    let mut w = security(2, CompletionPolicy::Strict, 1);
    ok(&mut w, Command::start_task("T1"));
    assert_eq!(active(&w), ["T1", "X1"]);
    ok(&mut w, Command::create_task("other"));
    ok(&mut w, Command::extract_xtag("T2", "F1", "queued", ["P1"]));
    let marks = w.marks.len();
    assert_eq!(rejected(&mut w, Command::link_mark("T1", "X2")), Rule::WipExceeded);
    assert_eq!(w.marks.len(), marks, "no mark created");

    // With room, the link co-starts the tag.
    let mut w = security(3, CompletionPolicy::Strict, 1);
    ok(&mut w, Command::start_task("T1"));
    ok(&mut w, Command::create_task("other"));
    ok(&mut w, Command::extract_xtag("T2", "F1", "queued", ["P1"]));
    ok(&mut w, Command::link_mark("T1", "X2"));
    assert_eq!(active(&w), ["T1", "X1", "X2"]);
}

#[test]
fn unlink_mark_keeps_provenance() {
    let mut w = security(3, CompletionPolicy::Strict, 1);
    ok(&mut w, Command::start_task("T1"));
    ok(&mut w, Command::complete_xtag("X1", vec![ChangeSpec::new("fix", "")]));
    assert_eq!(
        rejected(
            &mut w,
            Command::UnlinkMark {
                dev_card: "C1".into(),
                xtag: "X1".into()
            }
        ),
        Rule::ProvenanceMark
    );
    ok(
        &mut w,
        Command::UnlinkMark {
            dev_card: "T1".into(),
            xtag: "X1".into(),
        },
    );
    assert!(!w.has_mark(&"T1".into(), &"X1".into()));
    assert_eq!(
        rejected(
            &mut w,
            Command::UnlinkMark {
                dev_card: "T1".into(),
                xtag: "X1".into()
            }
        ),
        Rule::UnknownMark
    );
}

#[test]
fn start_task_co_starts_all_pending_tags() {
    let mut w = security(3, CompletionPolicy::Strict, 2);
    let r = ok(&mut w, Command::start_task("T1"));
    assert_eq!(active(&w), ["T1", "X1", "X2"]);
    assert_eq!(r.events.len(), 1);
    for id in ["T1", "X1", "X2"] {
        assert_eq!(w.card(&id.into()).unwrap().started_at, Some(w.clock));
    }
}

#[test]
fn start_task_rejects_whole_co_start_over_limit() {
    let mut w = security(3, CompletionPolicy::Strict, 2);
    ok(&mut w, Command::create_task("unrelated"));
    ok(&mut w, Command::start_task("T2"));
    assert_eq!(rejected(&mut w, Command::start_task("T1")), Rule::WipExceeded);
    assert_eq!(active(&w), ["T2"]);
}

#[test]
fn start_task_leaves_done_tags_alone() {
    let mut w = security(3, CompletionPolicy::Strict, 1);
    ok(&mut w, Command::create_task("helper"));
    ok(&mut w, Command::link_mark("T2", "X1"));
    ok(&mut w, Command::start_task("T2"));
    ok(&mut w, Command::complete_xtag("X1", vec![]));
    let done_at = w.card(&"X1".into()).unwrap().done_at;
    ok(&mut w, Command::start_task("T1"));
    assert_eq!(active(&w), ["T1", "T2"]);
    assert_eq!(w.card(&"X1".into()).unwrap().done_at, done_at);
    assert_eq!(rejected(&mut w, Command::start_task("T1")), Rule::NotQueued);
    assert_eq!(rejected(&mut w, Command::start_task("T8")), Rule::UnknownTask);
}

#[test]
fn limit_one_can_never_co_start() {
    let mut w = security(1, CompletionPolicy::Warn, 1);
    assert_eq!(rejected(&mut w, Command::start_task("T1")), Rule::WipExceeded);
}

#[test]
fn per_board_limit_applies_on_top_of_shared() {
    let mut w = security(5, CompletionPolicy::Strict, 2);
    let mut wip = WipPolicy::shared(5);
    wip.per_board_limits.insert("F1".into(), 1);
    ok(
        &mut w,
        Command::SetPolicy {
            wip_policy: wip,
            completion_policy: CompletionPolicy::Strict,
        },
    );
    assert_eq!(rejected(&mut w, Command::start_task("T1")), Rule::WipExceeded);
}

#[test]
fn set_policy_cannot_undercut_active_work() {
    let mut w = security(3, CompletionPolicy::Strict, 1);
    ok(&mut w, Command::start_task("T1"));
    let tight = Command::SetPolicy {
        wip_policy: WipPolicy::shared(1),
        completion_policy: CompletionPolicy::Strict,
    };
    assert_eq!(rejected(&mut w, tight), Rule::WipExceeded);
    let zero = Command::SetPolicy {
        wip_policy: WipPolicy::shared(0),
        completion_policy: CompletionPolicy::Strict,
    };
    assert_eq!(rejected(&mut w, zero), Rule::InvalidPolicy);
    let mut unknown = WipPolicy::shared(3);
    unknown.per_board_limits.insert("F7".into(), 1);
    let cmd = Command::SetPolicy {
        wip_policy: unknown,
        completion_policy: CompletionPolicy::Warn,
    };
    assert_eq!(rejected(&mut w, cmd), Rule::InvalidPolicy);
}

#[test]
fn move_card_basics() {
    let mut w = ws(3, CompletionPolicy::Strict);
    ok(&mut w, Command::create_task("a"));
    ok(&mut w, Command::move_card("T1", "In Progress"));
    let started = w.card(&"T1".into()).unwrap().started_at;
    assert_eq!(started, Some(w.clock));

    // Backward moves are allowed and keep the first start stamp.
    ok(&mut w, Command::move_card("T1", "Backlog"));
    assert_eq!(w.card(&"T1".into()).unwrap().started_at, started);
    ok(&mut w, Command::move_card("T1", "In Progress"));
    assert_eq!(w.card(&"T1".into()).unwrap().started_at, started);

    assert_eq!(rejected(&mut w, Command::move_card("T1", "Nowhere")), Rule::UnknownColumn);
    assert_eq!(rejected(&mut w, Command::move_card("T5", "Done")), Rule::UnknownCard);
    ok(&mut w, Command::move_card("T1", "Done"));
    assert_eq!(rejected(&mut w, Command::move_card("T1", "Backlog")), Rule::CardDone);
}

#[test]
fn move_into_active_counts_against_wip() {
    let mut w = ws(1, CompletionPolicy::Strict);
    ok(&mut w, Command::create_task("a"));
    ok(&mut w, Command::create_task("b"));
    ok(&mut w, Command::move_card("T1", "In Progress"));
    assert_eq!(rejected(&mut w, Command::move_card("T2", "In Progress")), Rule::WipExceeded);
}

#[test]
fn moving_a_task_into_active_co_starts_its_tags() {
    let mut w = security(3, CompletionPolicy::Strict, 1);
    ok(&mut w, Command::move_card("T1", "In Progress"));
    assert_eq!(active(&w), ["T1", "X1"]);
}

#[test]
fn moving_an_xtag_into_done_is_rejected() {
    let mut w = security(3, CompletionPolicy::Strict, 1);
    assert_eq!(rejected(&mut w, Command::move_card("X1", "Done")), Rule::DirectXtagDone);
    ok(&mut w, Command::start_task("T1"));
    assert_eq!(rejected(&mut w, Command::move_card("X1", "Done")), Rule::DirectXtagDone);
    // Columns are per board: an X-Tag cannot be moved onto the dev board.
    ok(&mut w, Command::move_card("X1", "Backlog"));
    assert_eq!(column(&w, "F1", "Backlog"), ["X1"]);
}

#[test]
fn complete_xtag_feeds_front_of_backlog() {
    let mut w = security(3, CompletionPolicy::Strict, 1);
    ok(&mut w, Command::start_task("T1"));
    ok(&mut w, Command::complete_xtag("X1", vec![ChangeSpec::new("Sanitize inputs", "...")]));
    assert_eq!(column(&w, "F1", "Done"), ["X1"]);
    assert_eq!(column(&w, "dev", "Backlog")[0], "C1");
    assert!(w.has_mark(&"C1".into(), &"X1".into()));
    let c1 = w.card(&"C1".into()).unwrap();
    assert_eq!(c1.origin_xtag, Some("X1".into()));
    assert_eq!(w.card(&"X1".into()).unwrap().done_at, Some(c1.created_at));
}

#[test]
fn complete_xtag_with_no_specs() {
    let mut w = security(3, CompletionPolicy::Strict, 1);
    ok(&mut w, Command::start_task("T1"));
    let cards = w.cards.len();
    ok(&mut w, Command::complete_xtag("X1", vec![]));
    assert!(w.is_done(&"X1".into()));
    assert_eq!(w.cards.len(), cards);
}

#[test]
fn complete_xtag_requires_active() {
    let mut w = security(3, CompletionPolicy::Strict, 1);
    assert_eq!(rejected(&mut w, Command::complete_xtag("X1", vec![])), Rule::NotActive);
    assert_eq!(rejected(&mut w, Command::complete_xtag("X4", vec![])), Rule::UnknownXtag);
    assert_eq!(rejected(&mut w, Command::complete_xtag("T1", vec![])), Rule::WrongKind);
}

/// Reference model for feedback ordering: plain list insertion at the front,
/// last spec first.
fn reference_queue(before: &[String], new_ids: &[String]) -> Vec<String> {
    let mut q = before.to_vec();
    for id in new_ids.iter().rev() {
        q.insert(0, id.clone());
    }
    q
}

#[test]
fn complete_xtag_preserves_spec_order() {
    let mut w = ws(3, CompletionPolicy::Strict);
    ok(&mut w, Command::add_focus("Security", ["Risk"]));
    ok(&mut w, Command::create_task("Ta"));
    ok(&mut w, Command::create_task("Tb"));
    ok(&mut w, Command::extract_xtag("T1", "F1", "x", ["P1"]));
    ok(&mut w, Command::move_card("X1", "In Progress"));
    let before = column(&w, "dev", "Backlog");
    assert_eq!(before, ["T1", "T2"]);
    ok(
        &mut w,
        Command::complete_xtag("X1", vec![ChangeSpec::new("s1", ""), ChangeSpec::new("s2", "")]),
    );
    let after = column(&w, "dev", "Backlog");
    assert_eq!(after, reference_queue(&before, &["C1".into(), "C2".into()]));
    assert_eq!(after, ["C1", "C2", "T1", "T2"]);
    assert_eq!(w.card(&"C1".into()).unwrap().title, "s1");
}

/// Gating oracle: recompute the linked-tag states directly from the marks.
fn gate_open(w: &Workspace, task: &str) -> Vec<String> {
    w.marks
        .iter()
        .filter(|m| m.dev_card.as_str() == task)
        .filter(|m| {
            !w.board(&w.card(&m.xtag).unwrap().board_id())
                .unwrap()
                .columns
                .iter()
                .any(|c| c.stage == Stage::Done && c.cards.contains(&m.xtag))
        })
        .map(|m| m.xtag.to_string())
        .collect()
}

#[test]
fn strict_gate_blocks_until_tags_are_done() {
    let mut w = security(3, CompletionPolicy::Strict, 1);
    ok(&mut w, Command::start_task("T1"));
    assert_eq!(gate_open(&w, "T1"), ["X1"]);
    assert_eq!(rejected(&mut w, Command::complete_task("T1")), Rule::GateBlocked);
    assert_eq!(rejected(&mut w, Command::move_card("T1", "Done")), Rule::GateBlocked);
    ok(&mut w, Command::complete_xtag("X1", vec![]));
    assert!(gate_open(&w, "T1").is_empty());
    ok(&mut w, Command::complete_task("T1"));
    assert!(w.is_done(&"T1".into()));
}

#[test]
fn warn_gate_accepts_with_warning() {
    let mut w = ws(3, CompletionPolicy::Warn);
    ok(&mut w, Command::create_task("T1"));
    ok(&mut w, Command::add_focus("Security", ["Risk"]));
    ok(&mut w, Command::extract_xtag("T1", "F1", "first", ["P1"]));
    ok(&mut w, Command::start_task("T1"));
    ok(&mut w, Command::complete_xtag("X1", vec![]));
    ok(&mut w, Command::extract_xtag("T1", "F1", "second", ["P1"]));
    let r = ok(&mut w, Command::complete_task("T1"));
    assert_eq!(r.warnings, ["X2 not done"]);
    assert_eq!(rejected(&mut w, Command::complete_task("T1")), Rule::NotActive);
}

#[test]
fn link_to_done_task_is_rejected() {
    let mut w = security(3, CompletionPolicy::Warn, 0);
    ok(&mut w, Command::start_task("T1"));
    ok(&mut w, Command::complete_task("T1"));
    ok(&mut w, Command::create_task("b"));
    ok(&mut w, Command::extract_xtag("T2", "F1", "x", ["P1"]));
    assert_eq!(rejected(&mut w, Command::link_mark("T1", "X1")), Rule::TaskAlreadyDone);
}

#[test]
fn principle_lifecycle() {
    let mut w = ws(3, CompletionPolicy::Strict);
    ok(&mut w, Command::add_focus("Sustainability", ["Team Code Ownership"]));
    ok(&mut w, Command::create_task("t"));
    ok(&mut w, Command::extract_xtag("T1", "F1", "knowledge sharing", ["P1"]));
    let links = w.principle_links.clone();

    ok(
        &mut w,
        Command::RevisePrinciple {
            principle: "P1".into(),
            statement: "Team Code Ownership v2".into(),
        },
    );
    let p = w.principle(&"P1".into()).unwrap();
    assert_eq!((p.version, p.statement.as_str()), (2, "Team Code Ownership v2"));
    assert_eq!(w.principle_links, links);

    assert_eq!(
        rejected(&mut w, Command::RetirePrinciple { principle: "P1".into() }),
        Rule::RetireWouldOrphan
    );

    ok(
        &mut w,
        Command::AddPrinciple {
            focus: "F1".into(),
            statement: "Manage Technical Debt".into(),
        },
    );
    for text in ["v2", "v3"] {
        ok(
            &mut w,
            Command::RevisePrinciple {
                principle: "P2".into(),
                statement: text.into(),
            },
        );
    }
    let p2 = w.principle(&"P2".into()).unwrap();
    assert_eq!((p2.version, p2.revisions.len()), (3, 3));

    ok(&mut w, Command::RetirePrinciple { principle: "P2".into() });
    assert_eq!(
        rejected(
            &mut w,
            Command::RevisePrinciple {
                principle: "P2".into(),
                statement: "x".into()
            }
        ),
        Rule::PrincipleRetired
    );
    assert_eq!(
        rejected(&mut w, Command::extract_xtag("T1", "F1", "x", ["P2"])),
        Rule::MissingPrinciple
    );
    assert_eq!(
        rejected(&mut w, Command::RetirePrinciple { principle: "P9".into() }),
        Rule::UnknownPrinciple
    );
}

#[test]
fn retire_is_allowed_once_linked_tags_are_done() {
    let mut w = security(3, CompletionPolicy::Strict, 1);
    ok(&mut w, Command::start_task("T1"));
    ok(&mut w, Command::complete_xtag("X1", vec![]));
    ok(&mut w, Command::RetirePrinciple { principle: "P1".into() });
    assert!(w.principle(&"P1".into()).unwrap().retired);
}

#[test]
fn change_tasks_can_have_their_own_tags() {
    let mut w = security(4, CompletionPolicy::Strict, 1);
    ok(&mut w, Command::start_task("T1"));
    ok(&mut w, Command::complete_xtag("X1", vec![ChangeSpec::new("fix", "")]));
    ok(&mut w, Command::extract_xtag("C1", "F1", "second-order", ["P1"]));
    ok(&mut w, Command::start_task("C1"));
    assert_eq!(active(&w), ["C1", "T1", "X2"]);
}

#[test]
fn clock_advances_once_per_accepted_command() {
    let mut w = security(3, CompletionPolicy::Strict, 2);
    assert_eq!(w.clock, 4);
    let r = ok(&mut w, Command::start_task("T1"));
    assert_eq!(r.events[0].seq, 5);
    assert_eq!(w.clock, 5);
    rejected(&mut w, Command::start_task("T1"));
    assert_eq!(w.clock, 5);
}

#[test]
fn focus_columns_must_cover_every_stage() {
    use kanbanx_core::model::ColumnSpec;
    let mut w = ws(3, CompletionPolicy::Strict);
    let columns = |specs: &[(&str, Stage)]| Command::AddFocus {
        name: "Security".into(),
        principles: vec!["p".into()],
        columns: Some(specs.iter().map(|(n, s)| ColumnSpec::new(*n, *s)).collect()),
    };
    let missing_done = columns(&[("Todo", Stage::Queue), ("Doing", Stage::Active)]);
    assert_eq!(rejected(&mut w, missing_done), Rule::InvalidColumns);
    let duplicate = columns(&[("A", Stage::Queue), ("A", Stage::Active), ("B", Stage::Done)]);
    assert_eq!(rejected(&mut w, duplicate), Rule::InvalidColumns);
    let blank = columns(&[(" ", Stage::Queue), ("B", Stage::Active), ("C", Stage::Done)]);
    assert_eq!(rejected(&mut w, blank), Rule::InvalidColumns);
    ok(&mut w, columns(&[("Todo", Stage::Queue), ("Review", Stage::Active), ("Shipped", Stage::Done)]));
    assert_eq!(column(&w, "F1", "Review"), Vec::<String>::new());
}
