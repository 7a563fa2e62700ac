//! End-to-end checks of the `fracbound` binary: exit codes, file layout,
//! and a few known output values.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fracbound"))
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no exit code")
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["--version"])), 0);
    assert_eq!(code(&run(&["eval-h", "--help"])), 0);
}

#[test]
fn missing_config_is_a_usage_error() {
    let out = run(&["eval-h", "--config", "/nonexistent/config.json"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot read config"));
}

#[test]
fn schema_violation_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.json", r#"{"measur": {}}"#);
    let out = run(&["eval-h", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("schema-valid"));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    assert_eq!(code(&run(&["eval-h", "--nope"])), 1);
}

#[test]
fn eval_h_writes_table_with_unit_value_at_time_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "h.json",
        r#"{
            "measure": {"atoms": [{"beta": 0.5, "weight": 0.5641895835477563}]},
            "times": [0.0, 1.0],
            "lambdas": [1.0, 4.0]
        }"#,
    );
    let out_dir = dir.path().join("out");
    let out = run(&[
        "eval-h",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let csv = std::fs::read_to_string(out_dir.join("h.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t,lambda,h");
    assert_eq!(lines.len(), 5);
    assert_eq!(lines[1], "0.0,1.0,1.0");
    assert_eq!(lines[2], "0.0,4.0,1.0");
    // h(1, 1) for the normalized half-stable atom
    let h: f64 = lines[3].split(',').nth(2).unwrap().parse().unwrap();
    assert!((h - 0.427583576155807).abs() < 1e-9, "{h}");

    let diag: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("diagnostics.json")).unwrap())
            .unwrap();
    assert_eq!(diag["command"], "eval-h");
    assert!(diag["wall_time_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn solve_spectral_zero_datum_gives_zero_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.json",
        r#"{
            "domain": [3.141592653589793],
            "datum": {"kind": "zero"},
            "measure": {"atoms": [{"beta": 0.5, "weight": 0.5641895835477563}]},
            "truncation": 4,
            "times": [0.5, 1.0],
            "points": [[1.0], [2.0]]
        }"#,
    );
    let out_dir = dir.path().join("out");
    let out = run(&[
        "solve-spectral",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(out_dir.join("solution.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let u: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert_eq!(u, 0.0, "{line}");
    }
}

#[test]
fn solve_mc_requires_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "mc.json",
        r#"{
            "domain": [3.141592653589793],
            "datum": {"kind": "eigenmode", "index": [1]},
            "measure": {"atoms": [{"beta": 0.5, "weight": 0.5641895835477563}]},
            "times": [0.5],
            "points": [[1.5]],
            "paths": 100
        }"#,
    );
    let out = run(&["solve-mc", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));
}

#[test]
fn verify_passes_on_a_sound_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "v.json",
        r#"{
            "measure": {"atoms": [{"beta": 0.5, "weight": 0.5641895835477563}]},
            "times": [0.5, 1.0, 2.0],
            "lambdas": [1.0, 5.0, 25.0]
        }"#,
    );
    let out_dir = dir.path().join("out");
    let out = run(&[
        "verify",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("h-route-agreement: pass"), "{text}");
    assert!(text.contains("dt-bound: pass"), "{text}");
}

#[test]
fn verify_failure_exits_two() {
    // an unreachable route tolerance forces a verification failure
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "v.json",
        r#"{
            "measure": {"atoms": [{"beta": 0.5, "weight": 0.5641895835477563}]},
            "times": [1.0],
            "lambdas": [1.0],
            "route_tolerance": 1e-18
        }"#,
    );
    let out_dir = dir.path().join("out");
    let out = run(&[
        "verify",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
    let diag: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("diagnostics.json")).unwrap())
            .unwrap();
    assert_eq!(diag["pass"], false);
}

#[test]
fn sample_subordinator_reports_laplace_match() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "sub.json",
        r#"{
            "subordinator": [{"beta": 0.5, "scale": 1.0}],
            "paths": 2000,
            "horizon": 1.0,
            "sub_step": 0.01,
            "seed": 12
        }"#,
    );
    let out_dir = dir.path().join("out");
    let out = run(&[
        "sample-subordinator",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(out_dir.join("subordinator.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2001);
    let diag: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("diagnostics.json")).unwrap())
            .unwrap();
    for entry in diag["laplace"].as_array().unwrap() {
        let emp = entry["empirical"].as_f64().unwrap();
        let exact = entry["exact"].as_f64().unwrap();
        let se = entry["se"].as_f64().unwrap();
        assert!((emp - exact).abs() < 4.0 * se + 1e-3, "{entry}");
    }
}
