use std::path::Path;
use std::process::{Command, Output};

fn mapmerge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mapmerge"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = mapmerge(args);
    assert!(
        out.status.success(),
        "mapmerge {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let text = ok(&["config"]);
    assert!(text.contains("[change]"));
    let path = dir.path().join("c.toml");
    std::fs::write(&path, text.replace("t_unmerge = 0.5", "t_unmerge = 0.4")).unwrap();
    let again = ok(&["--config", s(&path), "config"]);
    assert!(again.contains("t_unmerge = 0.4"));
}

#[test]
fn bad_inputs_fail() {
    assert!(!mapmerge(&["--detectors", "magic", "config"]).status.success());
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never");
    assert!(!mapmerge(&["run", "/nonexistent.log", "--out", s(&out)]).status.success());
    assert!(!out.exists());
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[change]\nt_unmerge = 2.0\n").unwrap();
    assert!(!mapmerge(&["--config", s(&cfg), "config"]).status.success());
}

#[test]
fn simulate_run_eval() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for label in ["correct", "invalid"] {
        ok(&["simulate", "--scenario", "twin-corridor", "--label", label, "--out", s(d)]);
    }
    let invalid = d.join("twin_corridor_invalid_s0.log");
    let correct = d.join("twin_corridor_correct_s0.log");
    assert!(invalid.exists() && correct.exists());
    let spec = std::fs::read_to_string(d.join("twin_corridor_invalid_s0.merges")).unwrap();
    assert_eq!(spec.lines().count(), 1);
    assert!(spec.contains("\"label\":\"invalid\""));

    let res = d.join("res");
    let text = ok(&[
        "run",
        s(&invalid),
        s(&correct),
        "--detectors",
        "change,histogram",
        "--out",
        s(&res),
    ]);
    assert!(text.contains("twin_corridor_invalid_s0 (invalid)"));
    let csv = std::fs::read_to_string(res.join("results.csv")).unwrap();
    assert!(csv.starts_with("sequence,label,detector,max_score,mean_ms,evaluations,first_alarm"));
    assert_eq!(csv.lines().count(), 1 + 2 * 2);

    let rep = d.join("rep");
    let text = ok(&["eval", s(&res), "--out", s(&rep)]);
    assert!(text.contains("change"));
    for f in ["roc.csv", "summary.csv", "roc.svg"] {
        assert!(rep.join(f).exists(), "{f} missing");
    }
    let summary = std::fs::read_to_string(rep.join("summary.csv")).unwrap();
    assert!(summary.contains("change,1.0,"), "{summary}");
}

#[test]
fn run_with_dumps_and_explicit_merges() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["simulate", "--scenario", "twin-corridor", "--label", "invalid", "--out", s(d)]);
    let log = d.join("twin_corridor_invalid_s0.log");
    let merges = d.join("twin_corridor_invalid_s0.merges");
    ok(&[
        "run",
        s(&log),
        "--merges",
        s(&merges),
        "--detectors",
        "gridmap",
        "--label-dump",
        "--pgm",
        "--out",
        s(d),
    ]);
    let labels = std::fs::read_to_string(d.join("twin_corridor_invalid_s0.labels.csv")).unwrap();
    assert!(labels.starts_with("vertex,point,label\n"));
    assert!(labels.contains(",change"));
    let pgm = std::fs::read(d.join("twin_corridor_invalid_s0.current.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n"));
    assert!(d.join("twin_corridor_invalid_s0.other.pgm").exists());

    assert!(!mapmerge(&["run", s(&log), s(&log), "--merges", s(&merges)]).status.success());
}

#[test]
fn live_undoes_invalid_merge() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["simulate", "--scenario", "twin-corridor", "--label", "invalid", "--out", s(d)]);
    let text = ok(&[
        "live",
        s(&d.join("twin_corridor_invalid_s0.log")),
        "--detectors",
        "change",
        "--out",
        s(d),
    ]);
    assert!(text.contains("1 unmerges"), "{text}");
    let events = std::fs::read_to_string(d.join("events.jsonl")).unwrap();
    let kinds: Vec<&str> = events
        .lines()
        .map(|l| l.split('"').nth(3).unwrap())
        .collect();
    assert_eq!(kinds.first(), Some(&"merge_applied"));
    assert_eq!(kinds.last(), Some(&"unmerge_done"));
}
