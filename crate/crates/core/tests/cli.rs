//! End-to-end smoke tests of the command-line harness.

use std::fs;
use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_blowup-lab"))
}

fn work_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!(
        "blowup-lab-cli-test-{tag}-{}",
        std::process::id()
    ));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn stationary_writes_cache_and_artifacts() {
    let dir = work_dir("stationary");
    let out = dir.join("artifacts");
    let cache = dir.join("cache");
    let run = || {
        bin()
            .args(["stationary", "--p", "100", "--K", "2"])
            .arg("--out-dir")
            .arg(&out)
            .arg("--cache-dir")
            .arg(&cache)
            .env_remove("BLOWUP_LAB_CACHE_DIR")
            .output()
            .unwrap()
    };
    let first = run();
    assert!(
        first.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&first.stderr)
    );
    // exactly one cache entry, header carries one nodal radius (K-1)
    let entries: Vec<_> = fs::read_dir(&cache).unwrap().collect();
    assert_eq!(entries.len(), 1);
    let cache_file = entries[0].as_ref().unwrap().path();
    let text = fs::read_to_string(&cache_file).unwrap();
    let header: serde_json::Value =
        serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(header["p"], 100.0);
    assert_eq!(header["k"], 2);
    assert_eq!(header["nodal_radii"].as_array().unwrap().len(), 1);

    let csv = out.join("stationary_p1e2_K2.csv");
    let dat = out.join("stationary_p1e2_K2.dat");
    assert!(csv.exists() && dat.exists());
    let first_bytes = fs::read(&csv).unwrap();

    // rerun hits the cache and reproduces the artifact byte-for-byte
    let second = run();
    assert!(second.status.success());
    assert_eq!(first_bytes, fs::read(&csv).unwrap());
    let summary = fs::read_to_string(out.join("stationary_summary.json")).unwrap();
    let summary: serde_json::Value = serde_json::from_str(&summary).unwrap();
    assert_eq!(summary[0]["from_cache"], true);

    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn invalid_config_names_the_field() {
    let dir = work_dir("invalid");
    let config = dir.join("config.json");
    fs::write(&config, r#"{"p_sweep": []}"#).unwrap();
    let out = bin()
        .arg("stationary")
        .arg("--config")
        .arg(&config)
        .output()
        .unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("p_sweep"), "stderr: {stderr}");
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn env_var_overrides_cache_directory() {
    let dir = work_dir("envcache");
    let out = dir.join("artifacts");
    let ignored = dir.join("ignored-cache");
    let env_cache = dir.join("env-cache");
    let run = bin()
        .args(["stationary", "--p", "40", "--K", "2"])
        .arg("--out-dir")
        .arg(&out)
        .arg("--cache-dir")
        .arg(&ignored)
        .env("BLOWUP_LAB_CACHE_DIR", &env_cache)
        .output()
        .unwrap();
    assert!(
        run.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&run.stderr)
    );
    assert!(env_cache.exists());
    assert!(!ignored.exists());
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn heatflow_classifies_and_writes_series() {
    let dir = work_dir("heatflow");
    let out = dir.join("artifacts");
    let run = bin()
        .args([
            "heatflow", "--p", "50", "--K", "2", "--lambda", "5", "--horizon", "10",
            "--heat-cells", "800",
        ])
        .arg("--out-dir")
        .arg(&out)
        .arg("--cache-dir")
        .arg(dir.join("cache"))
        .env_remove("BLOWUP_LAB_CACHE_DIR")
        .output()
        .unwrap();
    assert!(
        run.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&run.stderr)
    );
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(stdout.contains("BlowUp"), "stdout: {stdout}");
    let json =
        fs::read_to_string(out.join("heatflow_p5e1_K2_lam5e0.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert!(v["classification"]["BlowUp"]["t_est"].as_f64().unwrap() > 0.0);
    assert!(out.join("heatflow_p5e1_K2_lam5e0.csv").exists());
    fs::remove_dir_all(&dir).unwrap();
}
