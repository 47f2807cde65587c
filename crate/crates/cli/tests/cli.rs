use std::path::Path;
use std::process::{Command, Output, Stdio};
use std::io::Write;

use serde_json::Value;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn kanbanx(dir: &Path, args: &[&str]) -> Run {
    kanbanx_with_input(dir, args, None)
}

fn kanbanx_with_input(dir: &Path, args: &[&str], input: Option<&[u8]>) -> Run {
    let mut child = Command::new(env!("CARGO_BIN_EXE_kanbanx"))
        .arg("--data-dir")
        .arg(dir)
        .args(args)
        .env_remove("KANBANX_DATA_DIR")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    {
        let mut stdin = child.stdin.take().unwrap();
        if let Some(bytes) = input {
            stdin.write_all(bytes).unwrap();
        }
    }
    let Output { status, stdout, stderr } = child.wait_with_output().unwrap();
    Run {
        code: status.code().unwrap(),
        stdout: String::from_utf8(stdout).unwrap(),
        stderr: String::from_utf8(stderr).unwrap(),
    }
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let r = kanbanx(dir, args);
    assert_eq!(r.code, 0, "{args:?}: {}", r.stderr);
    r.stdout
}

fn checksum(dir: &Path) -> String {
    ok(dir, &["checksum"]).trim().to_owned()
}

fn demo(dir: &Path, wip: &str) {
    ok(dir, &["init", "Survey Tool", "--wip", wip]);
    ok(dir, &["task", "Upload survey results"]);
    ok(dir, &["task", "Export reports"]);
    ok(dir, &["focus", "add", "Security", "-p", "Assess risk and vulnerabilities"]);
    ok(dir, &["extract", "T1", "Security", "Assess injection risk", "-p", "P1"]);
}

#[test]
fn wip_overflow_exits_2_with_rule() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    demo(dir, "2");
    ok(dir, &["start", "T1"]);
    let before = checksum(dir);
    let r = kanbanx(dir, &["start", "T2"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("WipExceeded"), "{}", r.stderr);
    assert_eq!(checksum(dir), before);
}

#[test]
fn preset_apply_lists_focus_with_three_principles() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    ok(dir, &["init", "demo"]);
    ok(dir, &["preset", "apply", "sustainability"]);
    let list = ok(dir, &["focus", "list"]);
    assert!(list.contains("Sustainability  (3 principles)"), "{list}");
    assert!(list.contains("Team Code Ownership"));
    let structured: Value = serde_json::from_str(&ok(dir, &["--output", "structured", "focus", "list"])).unwrap();
    assert_eq!(structured[0]["name"], "Sustainability");
    assert_eq!(structured[0]["principles"].as_array().unwrap().len(), 3);
}

#[test]
fn preset_from_file() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    ok(dir, &["init", "demo"]);
    let file = tmp.path().join("usability.json");
    std::fs::write(&file, r#"{"focus_name":"Usability","principles":["Learnable"],"example_xtags":[]}"#).unwrap();
    ok(dir, &["preset", "apply", "--file", file.to_str().unwrap()]);
    assert!(ok(dir, &["focus", "list"]).contains("Usability  (1 principle)"));
    let r = kanbanx(dir, &["preset", "apply", "speed"]);
    assert_eq!(r.code, 1);
}

#[test]
fn export_import_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("data");
    demo(&dir, "3");
    ok(&dir, &["start", "T1"]);
    ok(&dir, &["done-xtag", "X1", "-c", "Escape inputs::parameterize queries", "-c", "Add fuzz test"]);
    ok(&dir, &["done-task", "T1"]);
    let exported = ok(&dir, &["export"]);
    let fresh = tmp.path().join("fresh");
    let r = kanbanx_with_input(&fresh, &["import", "--into", fresh.to_str().unwrap()], Some(exported.as_bytes()));
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(checksum(&fresh), checksum(&dir));
    assert_eq!(ok(&fresh, &["export"]), exported);
    // Importing the same workspace twice is refused.
    let again = kanbanx_with_input(&fresh, &["import"], Some(exported.as_bytes()));
    assert_eq!(again.code, 1);
}

#[test]
fn board_shows_marks_and_principle_chips() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    demo(dir, "3");
    ok(dir, &["link", "T2", "X1"]);
    let board = ok(dir, &["board"]);
    assert!(board.contains("T1    Upload survey results  [X1]"), "{board}");
    assert!(board.contains("T2    Export reports  [X1]"), "{board}");
    assert!(board.contains("X1    Assess injection risk  <- T1 T2  {P1}"), "{board}");
    assert!(board.contains("Security [F1]"));
    assert!(board.contains("WIP 0/3"));
}

#[test]
fn change_tasks_land_at_backlog_front_in_order() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    demo(dir, "3");
    ok(dir, &["start", "T1"]);
    ok(dir, &["done-xtag", "X1", "-c", "first", "-c", "second", "-c", "third"]);
    let ws: Value = serde_json::from_str(&ok(dir, &["--output", "structured", "board"])).unwrap();
    assert_eq!(ws["dev_board"]["columns"][0]["cards"], serde_json::json!(["C1", "C2", "C3", "T2"]));
    assert_eq!(ws["cards"]["C2"]["title"], "second");
    assert_eq!(ws["cards"]["C2"]["origin_xtag"], "X1");
}

#[test]
fn gate_blocks_done_task_until_tags_finish() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    demo(dir, "3");
    ok(dir, &["start", "T1"]);
    let r = kanbanx(dir, &["done-task", "T1"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("GateBlocked"));
    ok(dir, &["policy", "--completion", "warn"]);
    let r = kanbanx(dir, &["done-task", "T1"]);
    assert_eq!(r.code, 0);
    assert!(r.stderr.contains("warning:"), "{}", r.stderr);
}

#[test]
fn structured_output_is_stable_under_rerender() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    demo(dir, "3");
    for args in [
        &["--output", "structured", "board"][..],
        &["--output", "structured", "trace", "T1"],
        &["--output", "structured", "metrics", "flow"],
        &["--output", "structured", "metrics", "coverage"],
        &["--output", "structured", "task", "another"],
    ] {
        let out = ok(dir, args);
        let parsed: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(kanbanx_cli::structured(&parsed).unwrap(), out, "{args:?}");
    }
}

#[test]
fn metrics_and_trace() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    demo(dir, "3");
    let cov = ok(dir, &["metrics", "coverage", "--focus", "Security"]);
    assert!(cov.contains("0.50"), "{cov}");
    let csv = ok(dir, &["metrics", "flow", "--cfd-csv"]);
    assert!(csv.starts_with("tick,board,column,count\n"));
    let table = ok(dir, &["metrics", "flow", "--window", "2"]);
    assert!(table.contains("lead") && table.contains("throughput"));
    let tr = ok(dir, &["trace", "X1"]);
    assert!(tr.contains("T1 -mark-> X1") && tr.contains("X1 -cites-> P1"), "{tr}");
    let usage = ok(dir, &["principle", "usage", "P1"]);
    assert_eq!(usage, "X1 <- T1\n");
    assert_eq!(kanbanx(dir, &["trace", "T9"]).code, 1);
}

#[test]
fn principle_lifecycle() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    demo(dir, "3");
    let r = kanbanx(dir, &["principle", "retire", "P1"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("RetireWouldOrphan"));
    ok(dir, &["principle", "add", "Security", "Least privilege"]);
    ok(dir, &["principle", "revise", "P2", "Grant least privilege"]);
    ok(dir, &["principle", "retire", "P2"]);
    let board = ok(dir, &["board"]);
    assert!(board.contains("P2 v2 (retired): Grant least privilege"), "{board}");
}

#[test]
fn usage_and_workspace_errors_exit_1() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    assert_eq!(kanbanx(dir, &["board"]).code, 1);
    assert_eq!(kanbanx(dir, &["frobnicate"]).code, 1);
    assert_eq!(kanbanx(dir, &["--output", "yaml", "board"]).code, 1);
    ok(dir, &["init", "one"]);
    ok(dir, &["init", "two"]);
    let r = kanbanx(dir, &["board"]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("--workspace"));
    ok(dir, &["--workspace", "two", "task", "x"]);
    assert_eq!(kanbanx(dir, &["-w", "three", "board"]).code, 1);
    assert_eq!(kanbanx(dir, &["init", "one"]).code, 1);
    assert_eq!(kanbanx(dir, &["init", "zero", "--wip", "0"]).code, 1);
    assert_eq!(kanbanx(dir, &["--help"]).code, 0);
}

#[test]
fn data_dir_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_kanbanx"))
        .args(["init", "env"])
        .env("KANBANX_DATA_DIR", tmp.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(tmp.path().join("env/workspace.json").is_file());
}

#[test]
fn concurrent_processes_serialize_on_the_lock() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().to_path_buf();
    ok(&dir, &["init", "busy", "--wip", "5"]);
    let handles: Vec<_> = (0..4)
        .map(|w| {
            let dir = dir.clone();
            std::thread::spawn(move || {
                for i in 0..8 {
                    ok(&dir, &["task", &format!("{w}-{i}")]);
                }
            })
        })
        .collect();
    for h in handles {
        h.join().unwrap();
    }
    let exported = ok(&dir, &["export"]);
    let seqs: Vec<u64> = exported
        .lines()
        .skip(1)
        .map(|l| serde_json::from_str::<Value>(l).unwrap()["seq"].as_u64().unwrap())
        .collect();
    assert_eq!(seqs, (1..=32).collect::<Vec<_>>());
    assert!(ok(&dir, &["validate"]).contains("ok"));
}
