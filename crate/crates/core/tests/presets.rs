use kanbanx_core::{
    apply_preset, execute, list_presets, load_preset, new_workspace, validate, Command,
    CompletionPolicy, WipPolicy, Workspace,
};

pub const SECURITY: [&str; 2] = [
    "Risk: Weigh how likely and how damaging each threat a story exposes the system to would be.",
    "Vulnerabilities: Find and close weaknesses an attacker could exploit before the change ships.",
];
pub const SUSTAINABILITY: [&str; 3] = [
    "Team Code Ownership: Every team member understands the code and can contribute to any part of it.",
    "Manage Technical Debt: Take on debt deliberately, track what has accrued, and pay down debt that no longer earns its keep.",
    "Preventative Maintenance: Pause feature work regularly to catch up on tests, documentation, and refactoring.",
];
pub const PERFORMANCE: [&str; 3] = [
    "Resource Management: Cut run time by using memory, hardware, and parallel processing efficiently.",
    "Purpose: Optimize only where the speedup matters overall and is worth the cost to readability and portability.",
    "Verifiability: Keep the results of large, hard-to-reproduce computations checkable.",
];

fn fresh() -> Workspace {
    new_workspace("demo", WipPolicy::shared(3), CompletionPolicy::Strict).unwrap()
}

#[test]
fn applied_statements_match_golden_text() {
    let mut ws = fresh();
    for (name, golden) in [
        ("security", &SECURITY[..]),
        ("sustainability", &SUSTAINABILITY[..]),
        ("performance", &PERFORMANCE[..]),
    ] {
        let t = load_preset(name).unwrap();
        assert!(apply_preset(&mut ws, &t, None).accepted);
        let board = ws.resolve_focus(name).unwrap();
        let applied: Vec<&str> = board.principles.iter().map(|p| p.statement.as_str()).collect();
        assert_eq!(applied, golden, "{name}");
    }
    assert_eq!(ws.focus_boards.len(), 3);
    assert!(validate(&ws).ok);
}

#[test]
fn list_names() {
    assert_eq!(list_presets(), ["security", "sustainability", "performance"]);
}

#[test]
fn preset_equals_manual_commands() {
    for name in list_presets() {
        let t = load_preset(name).unwrap();
        let mut via_preset = fresh();
        apply_preset(&mut via_preset, &t, None);
        let mut manual = fresh();
        let r = execute(&mut manual, &Command::add_focus(t.focus_name.clone(), t.principles.clone()), None);
        assert!(r.accepted);
        assert_eq!(via_preset.checksum(), manual.checksum(), "{name}");
    }
}

#[test]
fn example_tags_can_be_extracted() {
    let mut ws = fresh();
    let t = load_preset("sustainability").unwrap();
    apply_preset(&mut ws, &t, None);
    execute(&mut ws, &Command::create_task("Refactor importer"), None);
    let focus = ws.resolve_focus("Sustainability").unwrap();
    let ids: Vec<_> = focus.principles.iter().map(|p| p.id.clone()).collect();
    let focus_id = focus.id().clone();
    for x in &t.example_xtags {
        let principles: Vec<_> = x.principles.iter().map(|&i| ids[i].clone()).collect();
        let r = execute(&mut ws, &Command::extract_xtag("T1", focus_id.clone(), x.title.clone(), principles), None);
        assert!(r.accepted, "{}: {:?}", x.title, r.rejection);
    }
    assert!(validate(&ws).ok);
}
