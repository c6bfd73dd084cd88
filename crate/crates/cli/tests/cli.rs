use std::path::PathBuf;
use std::process::{Command, Output};

use hj_core::report::AnalysisReport;

fn hj(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hj")).args(args).env_remove("HJ_COLOR").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

/// Compares with a golden file; `HJ_UPDATE_GOLDEN=1` rewrites it.
fn check_golden(name: &str, actual: &str) {
    let path = golden(name);
    if std::env::var("HJ_UPDATE_GOLDEN").is_ok_and(|v| v == "1") {
        std::fs::write(&path, actual).unwrap();
    }
    let expected = std::fs::read_to_string(&path).unwrap();
    assert!(expected == actual, "{} differs from output:\n{actual}", path.display());
}

#[test]
fn analyze_golden_text() {
    for model in ["pontryagin", "euler"] {
        let o = hj(&["analyze", "--model", model, "--oracle-trials", "0", "--check-reducibility"]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        check_golden(&format!("{model}_analyze.txt"), &stdout(&o));
    }
}

#[test]
fn brackets_golden_text() {
    let o = hj(&["brackets", "--model", "euler"]);
    assert_eq!(o.status.code(), Some(0));
    check_golden("euler_brackets.txt", &stdout(&o));
}

#[test]
fn validate_passes() {
    let o = hj(&["validate", "--oracle-trials", "20", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains(": pass"));
}

#[test]
fn structured_output_parses() {
    let o = hj(&["brackets", "--model", "pontryagin", "--emit", "structured"]);
    assert_eq!(o.status.code(), Some(0));
    let r = AnalysisReport::from_json(&stdout(&o)).unwrap();
    assert_eq!(r.schema_version, "hj-report/1");
    assert_eq!(r.partition.unwrap().involutive, ["phi3", "phi4", "phi5", "phi6"]);
}

#[test]
fn latex_written_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("euler.tex");
    let o = hj(&["brackets", "--model", "euler", "--emit", "latex", "-o", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let tex = std::fs::read_to_string(path).unwrap();
    assert!(tex.contains("\\begin{document}") && tex.contains("\\Omega"));
}

#[test]
fn model_files_and_input_errors() {
    let file = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/models/euler.hj");
    let o = hj(&["parse", "--model", file.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("model euler: "));

    assert_eq!(hj(&["analyze", "--model", "kretschmann"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.hj");
    std::fs::write(&bad, "model bad\nfield q slots=(internal) role=dynamical momentum=p\nhamiltonian phi1[free=(i)] = p[i] + Q[i]  primary param=x\n").unwrap();
    let o = hj(&["parse", "--model", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error: "));
}

#[test]
fn color_only_when_requested() {
    let o = Command::new(env!("CARGO_BIN_EXE_hj")).args(["brackets"]).env("HJ_COLOR", "1").output().unwrap();
    assert!(stdout(&o).contains("\x1b[1m== Hamiltonians"));
    assert!(!stdout(&hj(&["brackets"])).contains('\x1b'));
}
