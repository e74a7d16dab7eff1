//! Exit-code and configuration contracts of the `vlab` binary.

use std::path::PathBuf;
use std::process::{Command, Output};

fn vlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vlab"))
        .args(args)
        .env_remove("VLAB_SEED")
        .output()
        .unwrap()
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("vlab-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn quick_selftest_passes() {
    let dir = tmp_dir("selftest");
    let out = vlab(&["selftest", "--quick", "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("PASS"));
    assert!(!stdout.contains("FAIL"));
    assert!(dir.join("selftest.json").exists());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn ito_check_refuses_low_hurst_with_exit_2() {
    let dir = tmp_dir("ito-low");
    let out = vlab(&[
        "ito-check", "--family", "stationary-fbm", "--hurst", "0.3",
        "--n", "128", "--mc-paths", "10", "--out", dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("unsupported regime"), "stderr: {stderr}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn unknown_flags_and_commands_exit_2() {
    let out = vlab(&["simulate", "--frobnicate", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("frobnicate"));

    let out = vlab(&["launch"]);
    assert_eq!(out.status.code(), Some(2));

    let out = vlab(&[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tmp_dir("config");
    let cfg = dir.join("run.conf");
    std::fs::write(&cfg, "hurst = 0.7\nn = 64\npaths = 1\n# comment\n").unwrap();
    let out = vlab(&[
        "simulate", "--config", cfg.to_str().unwrap(), "--hurst", "0.3",
        "--seed", "5", "--out", dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = std::fs::read_to_string(dir.join("manifest.json")).unwrap();
    // The flag wins over the file value.
    assert!(manifest.contains("\"hurst\": \"0.3\""), "{manifest}");
    assert!(manifest.contains("\"n\": \"64\""));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn unknown_config_keys_are_listed() {
    let dir = tmp_dir("badkey");
    let cfg = dir.join("run.conf");
    std::fs::write(&cfg, "hurst = 0.7\nwibble = 3\n").unwrap();
    let out = vlab(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("wibble"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn constraint_violations_name_the_key() {
    let out = vlab(&["simulate", "--hurst", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("(0,1)"), "stderr: {stderr}");

    let out = vlab(&["simulate", "--hurst", "lots"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("hurst"));
}

#[test]
fn env_seed_fallback_applies() {
    let dir = tmp_dir("envseed");
    let out = Command::new(env!("CARGO_BIN_EXE_vlab"))
        .args([
            "simulate", "--n", "32", "--paths", "1", "--out", dir.to_str().unwrap(),
        ])
        .env("VLAB_SEED", "777")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let manifest = std::fs::read_to_string(dir.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"seed\": \"777\""), "{manifest}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn multifractional_requires_existing_csv() {
    let out = vlab(&[
        "simulate", "--family", "multifractional", "--hurst-csv", "/nonexistent.csv",
        "--alpha", "0.1",
    ]);
    assert_eq!(out.status.code(), Some(2));

    // And a valid CSV round-trips.
    let dir = tmp_dir("mf");
    let csv = dir.join("hfun.csv");
    let mut text = String::from("t,H\n");
    for i in 0..=16 {
        let t = i as f64 / 16.0;
        text.push_str(&format!("{t},{}\n", 0.6 + 0.2 * t));
    }
    std::fs::write(&csv, text).unwrap();
    let out = vlab(&[
        "simulate", "--family", "multifractional", "--hurst-csv", csv.to_str().unwrap(),
        "--alpha", "0.05", "--n", "32", "--paths", "1", "--seed", "1",
        "--out", dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.join("path_0000.csv").exists());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn simulate_csv_schema() {
    let dir = tmp_dir("schema");
    let out = vlab(&[
        "simulate", "--hurst", "0.5", "--n", "16", "--paths", "1", "--seed", "3",
        "--out", dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.join("path_0000.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,B,X"));
    assert_eq!(lines.count(), 17);
    // H = 1/2 makes X coincide with B.
    for line in csv.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cols.len(), 3);
        assert!((cols[1] - cols[2]).abs() < 1e-12);
    }
    // Long format produces a single file with path ids.
    let out = vlab(&[
        "simulate", "--hurst", "0.5", "--n", "16", "--paths", "2", "--seed", "3",
        "--format", "long", "--out", dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.join("paths.csv")).unwrap();
    assert!(csv.starts_with("path_id,t,B,X\n"));
    assert_eq!(csv.lines().count(), 1 + 2 * 17);
    std::fs::remove_dir_all(&dir).ok();
}
