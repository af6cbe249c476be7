use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(format!("{name}.json"))
}

fn run(cmd: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpresponse"))
        .arg(cmd)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn write_config(dir: &Path, name: &str, value: &Value) -> PathBuf {
    let p = dir.join(format!("{name}.json"));
    fs::write(&p, serde_json::to_string_pretty(value).unwrap()).unwrap();
    p
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn solve_linear_has_zero_zeta() {
    let dir = TempDir::new().unwrap();
    let out = run("solve", &config("linear"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let sol = read_json(&dir.path().join("solution.json"));
    assert_eq!(sol["zeta"].as_f64(), Some(0.0));
}

#[test]
fn solve_cubic_residuals_small() {
    let dir = TempDir::new().unwrap();
    let out = run("solve", &config("cubic_golden"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0));
    let s = read_json(&dir.path().join("summary.json"));
    assert!(s["residuals"]["range"].as_f64().unwrap() <= 1e-10);
    assert!(s["residuals"]["bifurcation"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn double_zero_is_hypothesis_failure() {
    let dir = TempDir::new().unwrap();
    let out = run("solve", &config("double_zero"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn diagnose_golden_alpha_decreasing() {
    let dir = TempDir::new().unwrap();
    let out = run("diagnose", &config("cubic_golden"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0));
    let alphas: Vec<f64> = csv_rows(&dir.path().join("profile.csv"))
        .iter()
        .map(|r| r[1].parse().unwrap())
        .collect();
    assert_eq!(alphas.len(), 9);
    assert!(alphas.windows(2).all(|w| w[1] <= w[0]));
    let d = read_json(&dir.path().join("diagnose.json"));
    assert!(d["inequalities"]
        .as_array()
        .unwrap()
        .iter()
        .all(|i| i["holds"] == json!(true)));
}

#[test]
fn diagnose_rational_is_resonance() {
    let dir = TempDir::new().unwrap();
    let out = run("diagnose", &config("rational"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(4));
    assert!(dir.path().join("profile.csv").exists());
}

#[test]
fn diagnose_periodic_single_row() {
    let dir = TempDir::new().unwrap();
    let out = run("diagnose", &config("periodic"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(csv_rows(&dir.path().join("profile.csv")).len(), 1);
}

#[test]
fn sweep_linear_norm_proportional_to_eps() {
    let dir = TempDir::new().unwrap();
    let out = run("sweep", &config("linear"), dir.path(), &["--parallel", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&dir.path().join("sweep.csv"));
    assert_eq!(rows.len(), 7);
    let ratios: Vec<f64> = rows
        .iter()
        .map(|r| r[2].parse::<f64>().unwrap() / r[0].parse::<f64>().unwrap())
        .collect();
    for r in &ratios {
        assert!((r / ratios[0] - 1.0).abs() <= 0.05, "{ratios:?}");
    }
}

#[test]
fn sweep_divergence_flips_once() {
    let dir = TempDir::new().unwrap();
    let mut cfg = read_json(&config("cubic_golden"));
    for m in cfg["problem"]["f"]["modes"].as_array_mut().unwrap() {
        m["re"] = json!(2.0);
    }
    cfg["problem"]["g"]["coeffs"] = json!([[1, 1.0], [3, 2.0]]);
    cfg["problem"]["truncation"] = json!({"K": 16, "N": 12});
    cfg["sweep"] = json!({"epsilons": [0.02, 0.05, 0.1, 0.2, 0.3, 0.5, 0.8]});
    let path = write_config(dir.path(), "div", &cfg);
    let out = run("sweep", &path, dir.path(), &["--parallel", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let flags: Vec<bool> = csv_rows(&dir.path().join("sweep.csv"))
        .iter()
        .map(|r| r[6] == "true")
        .collect();
    let flips = flags.windows(2).filter(|w| w[0] != w[1]).count();
    assert_eq!(flips, 1, "{flags:?}");
    assert!(flags[0] && !flags[flags.len() - 1]);
}

#[test]
fn sweep_empty_grid_header_only() {
    let dir = TempDir::new().unwrap();
    let mut cfg = read_json(&config("linear"));
    cfg["sweep"] = json!({"epsilons": []});
    let path = write_config(dir.path(), "empty", &cfg);
    let out = run("sweep", &path, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(text.lines().count(), 1);
}

#[test]
fn verify_acceptance_systems() {
    for name in ["cubic_golden", "chain_general"] {
        let dir = TempDir::new().unwrap();
        let out = run("verify", &config(name), dir.path(), &[]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{name}: {}",
            String::from_utf8_lossy(&out.stdout)
        );
        let v = read_json(&dir.path().join("verify.json"));
        assert_eq!(v["passed"], json!(true));
    }
}

#[test]
fn verify_detects_corruption() {
    let dir = TempDir::new().unwrap();
    let mut cfg = read_json(&config("cubic_golden"));
    cfg["verify"] = json!({"corrupt_mode": [1, 1], "corrupt_by": 1e-6, "ode": {"enabled": false}});
    let path = write_config(dir.path(), "corrupt", &cfg);
    let out = run("verify", &path, dir.path(), &[]);
    assert_ne!(out.status.code(), Some(0));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("direct_solve"), "{stderr}");
    assert!(stderr.contains("range_residual"), "{stderr}");
}

#[test]
fn verify_repelling_skips_ode() {
    let dir = TempDir::new().unwrap();
    let out = run("verify", &config("repelling"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0));
    let v = read_json(&dir.path().join("verify.json"));
    let ode = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "ode_comparison")
        .unwrap()
        .clone();
    assert_eq!(ode["skipped"], json!(true));
    assert!(!v["notices"].as_array().unwrap().is_empty());
}

#[test]
fn unknown_key_rejected() {
    let dir = TempDir::new().unwrap();
    let mut cfg = read_json(&config("linear"));
    cfg["solve"] = json!({"tolerance": 1.0});
    let path = write_config(dir.path(), "bad", &cfg);
    let out = run("solve", &path, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn literal_flag_accepted() {
    let dir = TempDir::new().unwrap();
    let out = run("solve", &config("chain_general"), dir.path(), &["--literal-3-1b"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn outputs_are_deterministic() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for d in [&a, &b] {
        assert_eq!(run("solve", &config("cubic_golden"), d.path(), &[]).status.code(), Some(0));
        assert_eq!(
            run("sweep", &config("cubic_golden"), d.path(), &["--parallel", "4"]).status.code(),
            Some(0)
        );
    }
    for f in ["solution.json", "summary.json", "sweep.csv"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}
