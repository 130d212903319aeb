use std::path::Path;
use std::process::{Command, Output};

fn roughsq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_roughsq")).args(args).env("ROUGHSQ_THREADS", "1").output().expect("binary runs")
}

fn text(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn list_is_stable_and_names_the_core_experiments() {
    let a = roughsq(&["list"]);
    assert!(a.status.success());
    let out = text(&a);
    for id in ["sobolev-ratio", "weaktype-growth", "diff-classify"] {
        assert!(out.contains(id), "{id} missing");
    }
    assert!(out.contains("claim:"));
    assert!(out.contains("c15"));
    assert_eq!(out, text(&roughsq(&["list"])));
}

#[test]
fn identical_runs_write_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let o = roughsq(&["run", "sym-identity", "--function", "smooth_bump", "--tier", "quick", "--out", path(d)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(text(&o).contains("max_relative_error"));
    }
    let ra = std::fs::read(a.join("report.json")).unwrap();
    assert_eq!(ra, std::fs::read(b.join("report.json")).unwrap());
    assert!(a.join("metadata.json").exists() && a.join("report.txt").exists());
    let csv = std::fs::read_to_string(a.join("per_function.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "function,draws,max_relative_error,min_closed");
    let json: serde_json::Value = serde_json::from_slice(&ra).unwrap();
    assert_eq!(json["id"], "sym-identity");
    assert!(json.get("wall_clock").is_none());
}

#[test]
fn config_file_is_merged_under_the_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    let out = dir.path().join("out");
    std::fs::write(&cfg, format!("experiment = \"scaling-lemma\"\ntier = \"quick\"\nseed = 9\nalpha = 0.75\nout = \"{}\"\n", path(&out))).unwrap();
    let o = roughsq(&["run", "--config", path(&cfg), "--alpha", "1.25"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(json["params"]["alpha"], 1.25);
    assert_eq!(json["params"]["seed"], 9.0);
}

#[test]
fn invalid_input_exits_with_status_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "experiment = \"menger-bound\"\nresolution = 4\n").unwrap();
    let o = roughsq(&["run", "--config", path(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("resolution"));
    let o = roughsq(&["run", "no-such-experiment", "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    let o = roughsq(&["run", "menger-bound", "--alpha", "1", "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--alpha"));
    let o = roughsq(&["run", "sobolev-ratio", "--alpha", "2", "--function", "smooth_bump", "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failing_verdicts_exit_with_status_one_and_are_named() {
    let dir = tempfile::tempdir().unwrap();
    let o = roughsq(&["run", "c7", "--tier", "quick", "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAIL criterion-7: hardy.log_coefficient_vs_half"));
}

#[test]
fn criteria_run_by_number() {
    let dir = tempfile::tempdir().unwrap();
    let o = roughsq(&["run", "c10", "--tier", "quick", "--out", path(dir.path())]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(json["id"], "criterion-10");
}
