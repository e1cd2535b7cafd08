use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn spectre(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spectre")).args(args).output().expect("spawn spectre")
}

fn scenarios_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn write_scenario(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("terminated by signal")
}

fn report(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

const SMALL: &str = r#"{
  "operator": { "kind": "diagonal", "params": { "eigenvalues": [[1, 0], [4, 0]] } },
  "f": { "kind": "all-ones" },
  "evolve": { "T": 400, "dt": 0.1, "method": "spectral" },
  "k_grid": { "lo": 0.5, "hi": 2.5, "step": 0.05 },
  "checks": ["unstable", "embedded"]
}"#;

#[test]
fn malformed_json_reports_position_and_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let p = write_scenario(tmp.path(), "bad.json", "{\n  \"operator\": {\n    \"kind\": \"diagonal\",,\n");
    let o = spectre(&["diagnose", "--scenario", p.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3"), "{err}");
    assert!(err.contains("column"), "{err}");
}

#[test]
fn unknown_field_names_its_path() {
    let tmp = tempfile::tempdir().unwrap();
    let body = SMALL.replace("\"step\": 0.05", "\"step\": 0.05, \"stride\": 2");
    let p = write_scenario(tmp.path(), "s.json", &body);
    let o = spectre(&["diagnose", "--scenario", p.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("k_grid"));
}

#[test]
fn bad_arguments_exit_one_and_help_exits_zero() {
    assert_eq!(code(&spectre(&["diagnose"])), 1);
    assert_eq!(code(&spectre(&["frobnicate"])), 1);
    assert_eq!(code(&spectre(&["--help"])), 0);
}

#[test]
fn missing_scenario_file_exits_one() {
    let o = spectre(&["build", "--scenario", "/nonexistent/scenario.json"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn complex_eigenvalue_exits_three() {
    let tmp = tempfile::tempdir().unwrap();
    let p = scenarios_dir().join("complex_eigenvalue.json");
    let o = spectre(&["diagnose", "--scenario", p.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    assert_eq!(report(tmp.path())["exit_code"], 3);
}

#[test]
fn two_mode_scenario_flags_both_frequencies() {
    let tmp = tempfile::tempdir().unwrap();
    let p = scenarios_dir().join("diag_1_4.json");
    let o = spectre(&["diagnose", "--scenario", p.to_str().unwrap(), "--out", tmp.path().to_str().unwrap(), "--test-mode"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(tmp.path());
    let detected = r["results"]["verdict"]["detected"].as_array().unwrap();
    let ks: Vec<f64> = detected.iter().map(|d| d["k"].as_f64().unwrap()).collect();
    assert_eq!(ks.len(), 2, "{ks:?}");
    assert!((ks[0] - 1.0).abs() <= 0.01 && (ks[1] - 2.0).abs() <= 0.01, "{ks:?}");

    let scan = fs::read_to_string(tmp.path().join("scan.csv")).unwrap();
    let mut lines = scan.lines();
    assert_eq!(lines.next().unwrap(), "k,limit_norm_fit_a,decay_fit_b,flagged");
    assert_eq!(lines.count(), 291);
    for name in ["growth.csv", "amplitude_convergence.csv", "w1.csv", "absorption.json", "timings.json"] {
        assert!(tmp.path().join(name).exists(), "{name} missing");
    }
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let p = write_scenario(tmp.path(), "s.json", SMALL);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for dir in [&a, &b] {
        let o = spectre(&["diagnose", "--scenario", p.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
        assert_eq!(code(&o), 0);
    }
    for name in ["report.json", "scan.csv", "growth.csv"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name} differs");
    }
}

#[test]
fn sequential_flag_gives_the_same_report() {
    let tmp = tempfile::tempdir().unwrap();
    let p = write_scenario(tmp.path(), "s.json", SMALL);
    let a = tmp.path().join("par");
    let b = tmp.path().join("seq");
    assert_eq!(code(&spectre(&["diagnose", "--scenario", p.to_str().unwrap(), "--out", a.to_str().unwrap()])), 0);
    assert_eq!(
        code(&spectre(&["diagnose", "--scenario", p.to_str().unwrap(), "--out", b.to_str().unwrap(), "--sequential"])),
        0
    );
    assert_eq!(fs::read(a.join("report.json")).unwrap(), fs::read(b.join("report.json")).unwrap());
}

#[test]
fn empty_check_set_writes_no_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let body = SMALL.replace("[\"unstable\", \"embedded\"]", "[]");
    let p = write_scenario(tmp.path(), "s.json", &body);
    let out = tmp.path().join("out");
    let o = spectre(&["diagnose", "--scenario", p.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(out.join("report.json").exists());
    let csvs = fs::read_dir(&out).unwrap().filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "csv"));
    assert_eq!(csvs.count(), 0);
}

#[test]
fn build_writes_operator() {
    let tmp = tempfile::tempdir().unwrap();
    let p = write_scenario(tmp.path(), "s.json", SMALL);
    let o = spectre(&["build", "--scenario", p.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(tmp.path().join("operator.json").exists());
}

#[test]
fn evolve_writes_trajectory() {
    let tmp = tempfile::tempdir().unwrap();
    let p = write_scenario(tmp.path(), "s.json", SMALL);
    let o = spectre(&["evolve", "--scenario", p.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(tmp.path().join("trajectory.csv")).unwrap();
    assert!(csv.lines().count() > 100);
}

#[test]
fn verify_passes_golden_suite() {
    let tmp = tempfile::tempdir().unwrap();
    let o = spectre(&["verify", "--out", tmp.path().to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(code(&o), 0, "{stdout}");
    assert!(!stdout.contains("FAIL"));
    assert!(tmp.path().join("verify.json").exists());
}

#[test]
fn sweep_generates_seeded_variants() {
    let tmp = tempfile::tempdir().unwrap();
    let body = SMALL.replace("{ \"kind\": \"all-ones\" }", "{ \"kind\": \"seeded-random\", \"seed\": 0 }");
    let p = write_scenario(tmp.path(), "s.json", &body);
    let out = tmp.path().join("sweep");
    let o = spectre(&["sweep", "--scenario", p.to_str().unwrap(), "--out", out.to_str().unwrap(), "--count", "3"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    for seed in 1..=3 {
        assert!(out.join(format!("scenario_{seed}.json")).exists());
        assert!(out.join(format!("run_{seed}")).join("report.json").exists());
    }
}
