use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use lticlust_harness::{read_csv, CSV_HEADER};

const BIN: &str = env!("CARGO_BIN_EXE_lticlust");

fn golden_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden"))
}

fn lticlust(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn run_tiny(out: &Path, threads: &str) -> Vec<u8> {
    let config = golden_dir().join("tiny.json");
    let status = lticlust(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--threads",
        threads,
    ]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    fs::read(out.join("results.csv")).unwrap()
}

#[test]
fn run_matches_golden_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = run_tiny(dir.path(), "2");
    let golden = fs::read(golden_dir().join("tiny.csv")).unwrap();
    assert_eq!(String::from_utf8(csv).unwrap(), String::from_utf8(golden).unwrap());
}

#[test]
fn run_is_thread_count_independent() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(run_tiny(a.path(), "1"), run_tiny(b.path(), "4"));
}

#[test]
fn run_writes_exact_header_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let csv = String::from_utf8(run_tiny(dir.path(), "2")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), CSV_HEADER);
    // 2 widths x 2 N x 2 T x 2 trials
    assert_eq!(csv.lines().count(), 1 + 16);
    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 8);
    assert!(dir.path().join("config.json").exists());
}

#[test]
fn trials_and_seed_flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = golden_dir().join("tiny.json");
    let out = lticlust(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--trials",
        "1",
        "--seed",
        "99",
    ]);
    assert!(out.status.success());
    let rows = read_csv(&dir.path().join("results.csv")).unwrap();
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().all(|r| r.trial == 0));
}

#[test]
fn plot_renders_svgs_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = lticlust(&[
        "plot",
        "--csv",
        golden_dir().join("tiny.csv").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["error_vs_T_w0.svg", "heatmap_w0.svg", "error_vs_T_w1.svg", "heatmap_w1.svg"] {
        let svg = fs::read_to_string(dir.path().join(name)).unwrap();
        assert!(svg.starts_with("<svg"));
    }
}

#[test]
fn generate_writes_one_scenario_per_width() {
    let dir = tempfile::tempdir().unwrap();
    let config = golden_dir().join("tiny.json");
    let out = lticlust(&[
        "generate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("scenario_w1.json")).unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(value.is_object());
}

#[test]
fn validate_single_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = lticlust(&["validate", "--check", "10", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("[PASS] 10"));
    assert!(dir.path().join("validation.txt").exists());
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"K": 2}"#).unwrap();
    assert_eq!(lticlust(&["run", "--config", bad.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(lticlust(&["run"]).status.code(), Some(1));
    assert_eq!(lticlust(&["run", "--threads", "0", "--config", bad.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(lticlust(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(lticlust(&["validate", "--check", "42"]).status.code(), Some(1));
    let invalid = fs::read_to_string(golden_dir().join("tiny.json"))
        .unwrap()
        .replace("\"L2\": 5", "\"L2\": 3");
    fs::write(&bad, invalid).unwrap();
    assert_eq!(lticlust(&["run", "--config", bad.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn runtime_failures_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.csv");
    assert_eq!(lticlust(&["plot", "--csv", missing.to_str().unwrap()]).status.code(), Some(2));
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let config = golden_dir().join("tiny.json");
    let out = lticlust(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--out",
        blocker.join("sub").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn help_exits_with_zero() {
    assert_eq!(lticlust(&["--help"]).status.code(), Some(0));
}
