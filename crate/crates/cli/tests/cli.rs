use std::path::Path;
use std::process::{Command, Output};

fn deligne(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_deligne")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn scenario(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(format!("{name}.json")).display().to_string()
}

#[test]
fn lists_bundled_scenarios() {
    let out = deligne(&["list-scenarios"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["central_charge_fourier", "quantization_obstruction", "empty_fields", "sphere_monopole"] {
        assert!(text.contains(name), "{text}");
    }
}

#[test]
fn run_emits_report_and_series() {
    let dir = tempfile::tempdir().unwrap();
    let emit = dir.path().display().to_string();
    let out = deligne(&["run", "--scenario", &scenario("wilson_winding"), "--refine", "16,32", "--emit", &emit]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["refinement"], serde_json::json!([16, 32]));
    assert_eq!(report["gerbe"]["winding"], 2);
    let csv = std::fs::read_to_string(dir.path().join("bracket.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(dir.path().join("timings.json").exists());
}

#[test]
fn bundled_names_resolve() {
    assert_eq!(code(&deligne(&["run", "--scenario", "empty_fields"])), 0);
}

#[test]
fn infeasible_scenarios_exit_with_three() {
    let out = deligne(&["run", "--scenario", &scenario("quantization_obstruction")]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8(out.stdout).unwrap().contains("required winding 1/2"));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    let text = std::fs::read_to_string(scenario("empty_fields")).unwrap().replace("\"k\": 1", "\"k\": 0");
    std::fs::write(&path, text).unwrap();
    let out = deligne(&["run", "--scenario", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8(out.stderr).unwrap().contains("couplings.k"));
    assert_eq!(code(&deligne(&["run", "--scenario", "no_such_scenario"])), 2);
    assert_eq!(code(&deligne(&["run", "--scenario", "empty_fields", "--tolerance", "-1"])), 2);
    assert_eq!(code(&deligne(&["run", "--scenario", "empty_fields", "--refine", "64,32"])), 2);
}

#[test]
fn verify_counts_numeric_checks() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tight.json");
    let mut cfg: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(scenario("wilson_winding")).unwrap()).unwrap();
    cfg["tolerances"] = serde_json::json!({"oracle_relative": 1e-12});
    std::fs::write(&path, cfg.to_string()).unwrap();
    let path = path.to_str().unwrap();
    assert_eq!(code(&deligne(&["run", "--scenario", path])), 0);
    let out = deligne(&["verify", "--scenario", path]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8(out.stdout).unwrap().contains("FAIL"));
}

#[test]
fn exact_only_runs_no_series() {
    let out = deligne(&["verify", "--scenario", "central_charge_fourier", "--exact-only"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(!text.contains("bracket"), "{text}");
}
