use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_subconvex"));
    for (k, _) in std::env::vars() {
        if k.starts_with("SUBCONVEX_") {
            c.env_remove(k);
        }
    }
    c
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--output-dir").arg(out).output().expect("binary runs")
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn arith_report_is_identical_across_worker_counts() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let one = run(&["run", "--suite", "arith", "--workers", "1", "--seed", "7"], a.path());
    let four = run(&["run", "--suite", "arith", "--workers", "4", "--seed", "7"], b.path());
    assert_eq!(one.status.code(), Some(0), "{}", String::from_utf8_lossy(&one.stderr));
    assert_eq!(four.status.code(), Some(0));
    let ra = std::fs::read(a.path().join("report.json")).unwrap();
    let rb = std::fs::read(b.path().join("report.json")).unwrap();
    assert_eq!(ra, rb);
    let meta: Value = serde_json::from_str(&std::fs::read_to_string(b.path().join("report.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["workers"], 4);
}

#[test]
fn ledger_suite_reports_the_exponent() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["run", "--suite", "ledger"], d.path());
    assert_eq!(o.status.code(), Some(0));
    let r = report(d.path());
    assert_eq!(r["schema_version"], 1);
    let first = &r["checks"][0]["measured"];
    assert_eq!(first["a"], "1");
    assert_eq!(first["sup"], "27/20");
    assert_eq!(first["paper_match"], true);
}

#[test]
fn ledger_optimize_prints_json() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["ledger-optimize", "--a", "3/5"], d.path());
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["sup"], "6/5");
    assert_eq!(v["paper_match"], true);
    let bad = run(&["ledger-optimize", "--a", "1/2"], d.path());
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn voronoi_without_data_is_skipped() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["run", "--suite", "voronoi"], d.path());
    assert_eq!(o.status.code(), Some(0));
    let r = report(d.path());
    assert_eq!(r["checks"][0]["status"], "SKIPPED");
    assert!(r["checks"][0]["reason"].is_string());
    let sub = run(&["voronoi"], d.path());
    assert_eq!(sub.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&sub.stdout).contains("SKIPPED"));
}

#[test]
fn bad_configuration_exits_two() {
    let d = tempfile::tempdir().unwrap();
    for args in [
        &["run", "--suite", "nope"][..],
        &["run", "--suite", "ledger", "--tolerance", "unknown=1"],
        &["run", "--suite", "ledger", "--tolerance", "delta"],
        &["run", "--suite", "ledger", "--workers", "0"],
        &["frobnicate"],
    ] {
        assert_eq!(run(args, d.path()).status.code(), Some(2), "{args:?}");
    }
    let missing = d.path().join("missing.txt");
    let o = run(&["run", "--suite", "voronoi", "--data", missing.to_str().unwrap()], d.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failing_check_exits_one_with_failure_list() {
    let d = tempfile::tempdir().unwrap();
    // no delta expansion at Q = 50 is accurate to 1e-30
    let o = run(&["run", "--suite", "delta", "--tolerance", "delta=1e-30"], d.path());
    assert_eq!(o.status.code(), Some(1));
    let r = report(d.path());
    assert_eq!(r["failures"][0], "delta/delta_expansion");
    assert!(d.path().join("delta_error_vs_q.csv").exists());
    assert!(d.path().join("report.meta.json").exists());
}

#[test]
fn env_overrides_flags() {
    let d = tempfile::tempdir().unwrap();
    let o = bin().args(["run"]).env("SUBCONVEX_SUITE", "ledger").env("SUBCONVEX_OUTPUT_DIR", d.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(report(d.path())["suite"], "ledger");
}
