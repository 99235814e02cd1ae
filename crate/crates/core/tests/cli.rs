use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn run(cmd: &str, config: &str, dir: &Path) -> (i32, Value) {
    let path = dir.join(format!("{cmd}.json"));
    fs::write(&path, config).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_canonical-spectra"))
        .args([cmd, "--config"])
        .arg(&path)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap();
    let summary = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), summary)
}

fn column(path: &Path, name: &str) -> Vec<f64> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config_sha256="));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(k).unwrap().parse().unwrap()).collect()
}

#[test]
fn szego_on_zero_potential() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, s) = run("szego", r#"{"potential": "free", "horizon": 30, "grids": {"blocks": 10}}"#, tmp.path());
    assert_eq!(code, 0);
    for key in ["potential", "hamiltonian", "maximal"] {
        assert_eq!(s["result"][key]["verdict"], "convergent-at-horizon");
        assert_eq!(s["result"][key]["sum"], 0.0);
    }
}

#[test]
fn entropy_of_free_system_vanishes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = r#"{"potential": "free", "horizon": 10, "grids": {"log": {"kind": "tan", "n": 64}}}"#;
    let (code, _) = run("entropy", cfg, tmp.path());
    assert_eq!(code, 0);
    let path = tmp.path().join("out/entropy_profile.csv");
    for name in ["K", "K_direct", "gamma", "R"] {
        assert!(column(&path, name).iter().all(|v| v.abs() < 1e-12), "{name}");
    }
}

#[test]
fn scatter_on_bump_settles() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = r#"{"potential": "bump", "horizon": 16, "grids": {"x_nodes": 128}}"#;
    let (code, s) = run("scatter", cfg, tmp.path());
    assert_eq!(code, 0);
    let e = column(&tmp.path().join("out/scatter_error.csv"), "error");
    let tail = &e[e.len() / 2..];
    assert!(tail.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9)));
    assert!(s["result"]["error_final"].as_f64().unwrap() < 1e-2);
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run("weyl", r#"{"potential": "bump", "horizon": -1}"#, tmp.path()).0, 2);
    assert_eq!(run("weyl", "not json", tmp.path()).0, 2);
    // no constant tail and too little depth to pin m down
    let (code, s) = run("weyl", r#"{"potential": "sin_square", "horizon": 2, "max_depth": 1.5}"#, tmp.path());
    assert_eq!(code, 3, "{s}");
    let diag: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("out/diagnostics.json")).unwrap()).unwrap();
    assert_eq!(diag["status"], "numeric-failure");
}
