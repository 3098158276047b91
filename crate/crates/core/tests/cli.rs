use std::fs;

use clap::Parser;
use tovds::cli::{main_with, Cli};

fn write_config(dir: &std::path::Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("cfg.json");
    fs::write(&path, body).unwrap();
    path
}

const STAR: &str = r#"{
  "eos": { "A": 1.0, "gamma": 1.5 },
  "params": { "G": 1.0, "c": 1.0, "Lambda": 1e-4 },
  "rho_c": 0.004,
  "stages": ["evolve", "match"],
  "grid": 128,
  "evolve": { "eps": 1e-3, "Theta0": 0.3, "T": 500.0, "record_every": 50 }
}"#;

fn run_cli(args: &[&str]) -> i32 {
    let mut full = vec!["tovds"];
    full.extend_from_slice(args);
    main_with(Cli::parse_from(full))
}

#[test]
fn run_writes_artifacts_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), STAR);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        assert_eq!(run_cli(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]), 0);
    }
    for name in ["profile.csv", "profile.json", "chart.csv", "modes.csv", "modes.json", "trajectory.csv", "match.json"] {
        let fa = fs::read(a.join(name)).unwrap_or_else(|_| panic!("{name} missing"));
        assert_eq!(fa, fs::read(b.join(name)).unwrap(), "{name} differs");
    }
    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(a.join("manifest.json")).unwrap()).unwrap();
    let stages: Vec<&str> = manifest["stages"].as_array().unwrap().iter().map(|s| s["name"].as_str().unwrap()).collect();
    assert_eq!(stages, ["equilibrium", "operator", "modes", "evolve", "match"]);
    let other: serde_json::Value = serde_json::from_slice(&fs::read(b.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config_hash"], other["config_hash"]);
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), STAR);
    let out = dir.path().join("o");
    let code = run_cli(&[
        "run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--stages", "modes", "--modes", "2", "--grid", "64",
    ]);
    assert_eq!(code, 0);
    let modes: serde_json::Value = serde_json::from_slice(&fs::read(out.join("modes.json")).unwrap()).unwrap();
    assert_eq!(modes["lambdas"].as_array().unwrap().len(), 2);
    assert!(!out.join("trajectory.csv").exists());
}

#[test]
fn bad_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{ "eos": { "A": 1.0, "gamma": 1.5 }, "rho_c": 0.01, "bogus": 1 }"#);
    assert_eq!(run_cli(&["run", "--config", cfg.to_str().unwrap()]), 2);
    assert_eq!(run_cli(&["run", "--config", dir.path().join("missing.json").to_str().unwrap()]), 2);
}

#[test]
fn failing_stage_exits_1_with_error_file() {
    let dir = tempfile::tempdir().unwrap();
    let body = STAR.replace("\"Lambda\": 1e-4", "\"Lambda\": 0.5");
    let cfg = write_config(dir.path(), &body);
    let out = dir.path().join("o");
    assert_eq!(run_cli(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]), 1);
    let err: serde_json::Value = serde_json::from_slice(&fs::read(out.join("error.json")).unwrap()).unwrap();
    assert_eq!(err["stage"], "equilibrium");
}

#[test]
fn sweep_writes_family_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{ "eos": { "A": 1.0, "gamma": 1.5 }, "params": { "G": 1.0, "c": 1.0, "Lambda": 0.0 },
             "rho_c": [0.001, 0.002], "Lambda_list": [0.0, 0.02] }"#,
    );
    let out = dir.path().join("f");
    assert_eq!(run_cli(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]), 0);
    let text = fs::read_to_string(out.join("family.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "rho_c,Lambda,r_plus,m_plus,kappa_plus,Q_plus,error");
    assert_eq!(lines.len(), 5);
    assert!(lines[3].ends_with("NotMonotoneShort"));
}
