//! End-to-end runs of the `ccm-ths` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ccm-ths"))
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("config.json");
    fs::write(&p, body).unwrap();
    p
}

fn run(args: &[&str], config: &Path, out: &Path) -> Output {
    bin()
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn without_timings(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timings");
    v
}

const ISING: &str = r#"{"model": {"kind": "spin_chain", "sites": 3, "field": 0.3},
    "truncation": "full", "checks": {"oracle": true}}"#;

#[test]
fn solve_writes_report_and_tables() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), ISING);
    let out = dir.path().join("out");
    let o = run(&["solve"], &config, &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report = read_json(&out.join("solve.json"));
    assert_eq!(report["status"], "ok");
    assert_eq!(report["schema_version"], 1);
    let e = report["energy"]["value"].as_f64().unwrap();
    let exact = report["exact_energy"].as_f64().unwrap();
    assert!((e - exact).abs() <= 1e-8);
    assert!(report["defects"].as_array().unwrap().iter().all(|d| d["status"] != "failed"));
    let amplitudes = fs::read_to_string(out.join("amplitudes.csv")).unwrap();
    assert_eq!(amplitudes.lines().count(), 8);
    assert!(fs::read_to_string(out.join("energy.csv")).unwrap().starts_with("model,"));
}

#[test]
fn reports_are_identical_apart_from_timings() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), ISING);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = run(&["solve", "--verify", "--seed", "7"], &config, out);
        assert_eq!(o.status.code(), Some(0));
    }
    let (ra, rb) = (read_json(&a.join("solve.json")), read_json(&b.join("solve.json")));
    assert!(ra["timings"].is_object());
    assert_eq!(without_timings(ra), without_timings(rb));
    assert_eq!(
        fs::read(a.join("amplitudes.csv")).unwrap(),
        fs::read(b.join("amplitudes.csv")).unwrap()
    );
}

#[test]
fn sweep_reaches_the_exact_energy() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), ISING);
    let out = dir.path().join("out");
    let o = run(&["sweep-subn"], &config, &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let report = read_json(&out.join("sweep_subn.json"));
    let rows = report["sweep"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.last().unwrap()["error"].as_f64().unwrap() <= 1e-8);
    assert_eq!(fs::read_to_string(out.join("sweep.csv")).unwrap().lines().count(), 4);
}

#[test]
fn spectrum_lists_all_eigenvalues() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{"model": {"kind": "oscillator", "lambda": 0, "dim": 20}, "output": {"formats": ["json"]}}"#,
    );
    let out = dir.path().join("out");
    let o = run(&["spectrum"], &config, &out);
    assert_eq!(o.status.code(), Some(0));
    let report = read_json(&out.join("spectrum.json"));
    let spectrum: Vec<f64> = report["spectrum"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert_eq!(spectrum.len(), 20);
    assert_eq!(&spectrum[..3], &[1.0, 3.0, 5.0]);
    assert!(!out.join("spectrum.csv").exists());
}

#[test]
fn ths_verify_reuses_a_solve_report() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), ISING);
    let out = dir.path().join("out");
    assert_eq!(run(&["solve"], &config, &out).status.code(), Some(0));
    let solved = out.join("solve.json");
    let o = run(&["ths-verify", "--report", solved.to_str().unwrap()], &config, &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));

    // perturbed amplitudes no longer solve the ket equations
    let mut report = read_json(&solved);
    let first = &mut report["ket_amplitudes"][0]["value"][0];
    *first = Value::from(first.as_f64().unwrap() + 1e-3);
    let tampered = dir.path().join("tampered.json");
    fs::write(&tampered, serde_json::to_string(&report).unwrap()).unwrap();
    let o = run(&["ths-verify", "--report", tampered.to_str().unwrap()], &config, &out);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stdout));
    let verdict = read_json(&out.join("ths_verify.json"));
    assert_eq!(verdict["status"], "check_failed");
    let ket = verdict["defects"].as_array().unwrap().iter().find(|d| d["name"] == "ket_residual").unwrap();
    assert_eq!(ket["status"], "failed");
}

#[test]
fn schema_errors_name_the_offending_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    for (body, path) in [
        (r#"{"model": {"kind": "oscillator", "lambda": 0, "dim": 4}, "solver": {"damping": 1.5}}"#, "solver.damping"),
        (r#"{"model": {"kind": "quark", "n": 2}}"#, "model.kind"),
        (r#"{"model": {"kind": "oscillator", "lambda": 0, "dim": 4}, "extra": true}"#, "extra"),
    ] {
        let config = write_config(dir.path(), body);
        let o = run(&["solve"], &config, &out);
        assert_eq!(o.status.code(), Some(1));
        let stderr = String::from_utf8_lossy(&o.stderr);
        assert!(stderr.contains(&format!("`{path}")), "{stderr}");
    }
    assert!(!out.exists(), "nothing is written for an invalid configuration");
}

#[test]
fn solver_failure_is_reported_with_exit_code_one() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{"model": {"kind": "oscillator", "lambda": 0.5, "dim": 16},
            "truncation": {"scheme": "sub_n", "n": 2},
            "solver": {"max_iterations": 1, "tolerance": 1e-14}}"#,
    );
    let out = dir.path().join("out");
    let o = run(&["solve"], &config, &out);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stdout));
    let report = read_json(&out.join("solve.json"));
    assert_eq!(report["status"], "error");
    assert!(report["error"]["kind"].is_string());
}

#[test]
fn missing_config_file_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["solve"], &dir.path().join("absent.json"), &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());
}
