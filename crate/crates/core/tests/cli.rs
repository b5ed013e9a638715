use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_binident"));
    c.env_remove("BINIDENT_SEED");
    c
}

fn example(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn stderr_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stderr).unwrap_or_else(|_| panic!("stderr: {}", String::from_utf8_lossy(&out.stderr)))
}

fn listing(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    names
}

#[test]
fn calibrate_prints_sigma() {
    let out = bin()
        .args(["calibrate", "--epsilon", "1", "--delta", "0.05", "--sensitivity", "1"])
        .output()
        .unwrap();
    let v = stdout_json(&out);
    assert!((v["sigma"].as_f64().unwrap() - 1.9070400457).abs() < 1e-8);
}

#[test]
fn calibrate_rejects_bad_budget() {
    let out = bin()
        .args(["calibrate", "--epsilon", "0", "--delta", "0.05", "--sensitivity", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "privacy_budget");
}

#[test]
fn check_channel_reports_law() {
    let out = bin()
        .args(["check-channel", "--p", "0.2", "--q", "0.3", "--sigma", "1", "--gap", "0.5", "--samples", "50000"])
        .output()
        .unwrap();
    let v = stdout_json(&out);
    assert!(v["z_score"].as_f64().unwrap().abs() < 4.0);
    assert_eq!(v["identifiable"], true);
}

#[test]
fn identify_writes_trials_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["identify", "--seeds", "3", "--steps", "2000", "--jobs", "1", "--config"])
        .arg(example("single.cfg"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(listing(dir.path()), ["summary.json", "trial_0.csv", "trial_1.csv", "trial_2.csv"]);
    let csv = std::fs::read_to_string(dir.path().join("trial_0.csv")).unwrap();
    assert!(csv.starts_with("k,err_sq\n1,"));
    assert!(csv.trim_end().ends_with(|c: char| c.is_ascii_digit()));
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["seeds"].as_array().unwrap().len(), 3);
    assert_eq!(summary["config"]["algorithm"]["steps"], 2000);
}

#[test]
fn summary_echo_reproduces_run() {
    let dir = tempfile::tempdir().unwrap();
    let run = |cfg: &Path, out: &Path| {
        bin()
            .args(["identify", "--seeds", "2", "--steps", "1500", "--seed", "42", "--config"])
            .arg(cfg)
            .arg("--out")
            .arg(out)
            .output()
            .unwrap()
    };
    let first = dir.path().join("first");
    assert!(run(&example("single_strong.cfg"), &first).status.success());
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(first.join("summary.json")).unwrap()).unwrap();
    let echo = dir.path().join("echo.json");
    std::fs::write(&echo, serde_json::to_string(&summary["config"]).unwrap()).unwrap();
    let second = dir.path().join("second");
    let out = run(&echo, &second);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["trial_0.csv", "trial_1.csv"] {
        assert_eq!(std::fs::read(first.join(f)).unwrap(), std::fs::read(second.join(f)).unwrap());
    }
}

#[test]
fn seed_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str, env: Option<&str>| {
        let mut c = bin();
        if let Some(s) = env {
            c.env("BINIDENT_SEED", s);
        }
        c.args(["identify", "--seeds", "1", "--steps", "500", "--config"])
            .arg(example("single.cfg"))
            .arg("--out")
            .arg(dir.path().join(sub))
            .output()
            .unwrap();
        std::fs::read(dir.path().join(sub).join("trial_0.csv")).unwrap()
    };
    let a = run("a", Some("7"));
    let b = run("b", Some("7"));
    let c = run("c", None);
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn distributed_writes_agents_and_network_mean() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["distributed", "--seeds", "2", "--steps", "1000", "--config"])
        .arg(example("ring.cfg"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        listing(dir.path()),
        ["agent_0.csv", "agent_1.csv", "agent_2.csv", "agent_3.csv", "agent_4.csv", "network_mean.csv", "summary.json"]
    );
    let s: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert!((s["lambda2"].as_f64().unwrap() - 0.690983).abs() < 1e-6);
    assert_eq!(s["connected"], true);
}

#[test]
fn rate_writes_curve_and_fit() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["rate", "--seeds", "4", "--steps", "20000", "--k-lo", "100", "--config"])
        .arg(example("single.cfg"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(listing(dir.path()), ["curve.csv", "fit.json"]);
    let fit: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("fit.json")).unwrap()).unwrap();
    assert!(fit["fit"]["slope"].as_f64().unwrap() < 0.0);
}

#[test]
fn non_identifiable_override_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["identify", "--p", "0.4", "--q", "0.6", "--config"])
        .arg(example("single.cfg"))
        .arg("--out")
        .arg(dir.path().join("x"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let e = stderr_json(&out);
    assert_eq!(e["error"], "non_identifiable_channel");
    assert!(e["message"].as_str().unwrap().contains("p+q"));
    assert!(!dir.path().join("x").exists());
}

#[test]
fn missing_config_is_reported() {
    let out = bin()
        .args(["identify", "--config", "/nonexistent/x.cfg", "--out", "/tmp/never"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(stderr_json(&out)["message"].as_str().unwrap().contains("/nonexistent/x.cfg"));
}

#[test]
fn unknown_key_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(example("single.cfg")).unwrap().replace("[channel]", "[channel]\nbogus = 1");
    let path = dir.path().join("bad.cfg");
    std::fs::write(&path, text).unwrap();
    let out = bin()
        .args(["identify", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_json(&out)["message"].as_str().unwrap().contains("bogus"));
}
