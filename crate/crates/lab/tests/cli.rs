//! End-to-end runs of the `qipm` binary.

use std::path::Path;
use std::process::{Command, Output};

fn qipm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qipm")).args(args).output().expect("spawn qipm")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_solve_sweep_fit_report() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("svm.json");
    let trace = dir.path().join("trace.json");
    let csv = dir.path().join("sweep.csv");
    let report = dir.path().join("report.md");

    let out = qipm(&["gen", "--n", "4", "--m", "8", "--p", "0.1", "--seed", "3", "--out", path(&data)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    for mode in ["exact", "tomography"] {
        let out = qipm(&["solve", "--instance", path(&data), "--mode", mode, "--trace", path(&trace)]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let stdout = String::from_utf8(out.stdout).unwrap();
        assert!(stdout.contains("converged: true"), "{stdout}");
        let lines: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&trace).unwrap()).unwrap();
        assert!(!lines.as_array().unwrap().is_empty());
    }

    let out = qipm(&[
        "sweep", "--n-min", "4", "--n-max", "8", "--per-cell", "2", "--seed", "1", "--p", "0,0.5",
        "--no-timing", "--out", path(&csv),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let first = std::fs::read(&csv).unwrap();

    let out = qipm(&["fit", "--in", path(&csv)]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("exponent b="), "{stdout}");
    assert!(stdout.trim_end().ends_with("n=8"), "{stdout}");
    assert!(!qipm(&["fit", "--in", path(&csv), "--y", "nope"]).status.success());

    let out = qipm(&["report", "--in", path(&csv), "--out", path(&report)]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&report).unwrap();
    assert!(text.contains("## Power-law fits against n"));

    // byte-identical regeneration with timing off
    let out = qipm(&[
        "sweep", "--n-min", "4", "--n-max", "8", "--per-cell", "2", "--seed", "1", "--p", "0,0.5",
        "--no-timing", "--out", path(&csv),
    ]);
    assert!(out.status.success());
    assert_eq!(std::fs::read(&csv).unwrap(), first);
}

#[test]
fn errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(qipm(&["solve", "--instance", path(&missing)]).status.code(), Some(1));
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"kind\": \"svm\", \"n\": 2}").unwrap();
    assert_eq!(qipm(&["solve", "--instance", path(&bad)]).status.code(), Some(1));
    let out = dir.path().join("x.json");
    assert_eq!(
        qipm(&["gen", "--n", "1", "--m", "8", "--p", "0", "--seed", "0", "--out", path(&out)]).status.code(),
        Some(1)
    );
    assert_eq!(qipm(&["bogus"]).status.code(), Some(2));
}
