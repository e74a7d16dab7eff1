//! Acceptance criterion for the command-line surface: repeated runs with an
//! identical seed and configuration produce byte-identical JSON and CSV
//! output in single-worker mode.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;

fn vlab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_vlab"))
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_file() {
            out.insert(
                path.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&path).unwrap(),
            );
        }
    }
    out
}

#[test]
fn criterion_10_reproducibility() {
    let base = std::env::temp_dir().join(format!("vlab-accept-{}", std::process::id()));
    let dir = base.join("run");
    std::fs::create_dir_all(&dir).unwrap();
    let run = |args: &[&str]| {
        let status = vlab()
            .args(args)
            .arg("--out")
            .arg(dir.to_str().unwrap())
            .arg("--workers")
            .arg("1")
            .output()
            .unwrap();
        assert!(
            status.status.success(),
            "command {args:?} failed: {}",
            String::from_utf8_lossy(&status.stderr)
        );
    };

    let mut identical = true;
    let mut detail = String::new();
    for args in [
        vec![
            "simulate", "--family", "stationary-fbm", "--hurst", "0.7", "--n", "128",
            "--paths", "3", "--seed", "42",
        ],
        vec![
            "integrate", "--g", "id", "--hurst", "0.7", "--n", "256", "--levels",
            "32,64,128,256", "--seed", "7",
        ],
        vec![
            "covariance", "--hurst", "0.6", "--grid-points", "4", "--mc-paths", "500",
            "--quad-panels", "256", "--seed", "9",
        ],
    ] {
        let args: Vec<&str> = args.to_vec();
        run(&args);
        let first = snapshot(&dir);
        run(&args);
        let second = snapshot(&dir);
        let same = first == second;
        identical &= same;
        detail.push_str(&format!("{}={} ", args[0], same));
    }
    std::fs::remove_dir_all(&base).ok();

    println!(
        "[acceptance] criterion 10 (reproducibility): {} — byte-identical outputs per command: {detail}",
        if identical { "PASS" } else { "FAIL" }
    );
    assert!(identical, "outputs were not byte-identical: {detail}");
}
