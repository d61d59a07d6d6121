use std::fs;

use saddlekit::cli::{run, EXIT_CONFIG, EXIT_OK, EXIT_UNCONVERGED};

fn args(dir: &std::path::Path, rest: &[&str]) -> Vec<String> {
    let mut v = vec!["saddlekit".to_string()];
    v.extend(rest.iter().map(|s| s.to_string()));
    v.push("--output_dir".into());
    v.push(dir.display().to_string());
    v
}

#[test]
fn profile_outputs() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(args(dir.path(), &["profile", "--nonlinearity", "sine"])), EXIT_OK);
    let csv = fs::read_to_string(dir.path().join("profile.csv")).unwrap();
    assert!(csv.starts_with("tau,u0,du0\n"));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("profile_summary.json")).unwrap()).unwrap();
    assert!((json["dissipation_integral"].as_f64().unwrap() - 8.0 / std::f64::consts::PI.powf(1.5)).abs() < 1e-6);
}

#[test]
fn solve_with_config_file_and_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# small run\nm = 2\nR = 12\nh = 1/4\nnonlinearity = allen_cahn\n").unwrap();
    let code = run(args(dir.path(), &["solve", "--config", cfg.to_str().unwrap(), "--h", "1/8"]));
    assert_eq!(code, EXIT_OK);
    for f in ["field_maximal.csv", "field_minimal.csv", "field_maximal.json", "field_minimal.json", "diagnostics.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("field_maximal.json")).unwrap()).unwrap();
    assert_eq!(meta["h"].as_f64(), Some(0.125));
    let rows = fs::read_to_string(dir.path().join("field_maximal.csv")).unwrap().lines().count();
    assert_eq!(rows, 1 + 97 * 98 / 2);
}

#[test]
fn unconverged_exit() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(args(dir.path(), &["solve", "--R", "12", "--h", "1/4", "--k_max", "2"])), EXIT_UNCONVERGED);
    assert!(dir.path().join("diagnostics.json").exists());
}

#[test]
fn config_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(args(dir.path(), &["solve", "--h", "5"])), EXIT_CONFIG);
    assert_eq!(run(args(dir.path(), &["profile", "--nonlinearity", "quartic"])), EXIT_CONFIG);
    assert_eq!(run(args(dir.path(), &["solve", "--m", "0"])), EXIT_CONFIG);
    assert_eq!(run(args(dir.path(), &["stability", "--R", "24"])), EXIT_CONFIG);
    assert_eq!(run(args(dir.path(), &["solve", "--config", "/nonexistent.cfg"])), EXIT_CONFIG);
    assert_eq!(run(["saddlekit", "solve", "--bogus", "1"]), EXIT_CONFIG);
    let bad = dir.path().join("bad.cfg");
    fs::write(&bad, "R = twelve\n").unwrap();
    assert_eq!(run(args(dir.path(), &["solve", "--config", bad.to_str().unwrap()])), EXIT_CONFIG);
}

#[test]
fn stability_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let code = run(args(dir.path(), &["stability", "--R", "48", "--h", "1/4", "--a_list", "2,3", "--trials", "4"]));
    assert_eq!(code, EXIT_OK);
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("stability.json")).unwrap()).unwrap();
    let mut keys: Vec<&str> = json.as_object().unwrap().keys().map(|k| k.as_str()).collect();
    keys.sort();
    assert_eq!(keys, ["hardy_margin", "limit_rhs", "m", "prefactor", "q_values", "rho_integral", "verdict"]);
    assert_eq!(json["hardy_margin"].as_f64(), Some(-1.75));
    assert_eq!(json["q_values"].as_array().unwrap().len(), 2);
}
