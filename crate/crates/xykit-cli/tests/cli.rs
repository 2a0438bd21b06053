//! End-to-end checks of the command-line interface: exit codes, artifact
//! layout, paper-value spot checks, and byte-level determinism.

use std::path::Path;
use std::process::Command;

fn xykit() -> Command {
    Command::new(env!("CARGO_BIN_EXE_xykit"))
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
}

#[test]
fn decompose_check_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = xykit()
        .args(["--seed", "1", "--out-dir"])
        .arg(dir.path())
        .args(["decompose", "--theta", "1.5708", "--beta", "0", "--check"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("reconstruction distance"));
    let dist: f64 = stdout
        .lines()
        .find(|l| l.contains("reconstruction distance"))
        .and_then(|l| l.split(':').next_back())
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert!(dist < 1e-10, "distance {dist}");
    assert!(dir.path().join("program.json").exists());
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn verify_roundtrip_and_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    xykit()
        .args(["--seed", "1", "--out-dir"])
        .arg(dir.path())
        .args(["decompose", "--theta", "0.7", "--beta", "0.2"])
        .status()
        .unwrap();
    let program = dir.path().join("program.json");
    let ok = xykit()
        .args(["--seed", "1", "--out-dir"])
        .arg(dir.path())
        .args(["verify", "--tol", "1e-9", "--program"])
        .arg(&program)
        .status()
        .unwrap();
    assert!(ok.success());
    // unreadable program is a domain error: exit code 1
    let missing = xykit()
        .args(["--seed", "1", "--out-dir"])
        .arg(dir.path())
        .args(["verify", "--program", "/nonexistent/p.json"])
        .status()
        .unwrap();
    assert_eq!(missing.code(), Some(1));
}

#[test]
fn usage_errors_exit_2() {
    let status = xykit().arg("no-such-command").status().unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn qaoa_counts_match_reference_values() {
    for (graph, gateset, expect) in [
        ("ring4", "cz", r#"{"CZ":10}"#),
        ("ring4", "cz-xy", r#"{"CZ":6,"XY":2}"#),
        ("complete4", "cz", r#"{"CZ":17}"#),
        ("complete4", "cz-xy", r#"{"CZ":7,"XY":5}"#),
    ] {
        let dir = tempfile::tempdir().unwrap();
        let out = xykit()
            .args(["--seed", "3", "--out-dir"])
            .arg(dir.path())
            .args(["qaoa", "counts", "--graph", graph, "--gateset", gateset])
            .output()
            .unwrap();
        assert!(out.status.success());
        let stdout = String::from_utf8_lossy(&out.stdout);
        assert!(stdout.trim().ends_with(expect), "{graph}/{gateset}: {stdout}");
    }
}

#[test]
fn ramsey_hits_frame_tracking_prediction() {
    let dir = tempfile::tempdir().unwrap();
    let out = xykit()
        .args(["--seed", "5", "--out-dir"])
        .arg(dir.path())
        .args(["ramsey", "--frame-freq-mhz", "40"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value =
        serde_json::from_str(&read(&dir.path().join("ramsey.json"))).unwrap();
    let fitted = json["fitted_frequency_hz"].as_f64().unwrap();
    assert!(
        (fitted - 857.76e6).abs() / 857.76e6 < 1e-4,
        "fitted {fitted}"
    );
}

#[test]
fn identical_seed_gives_identical_artifacts() {
    let run = |dir: &Path| {
        let status = xykit()
            .args(["--seed", "11", "--out-dir"])
            .arg(dir)
            .args([
                "qaoa",
                "landscape",
                "--graph",
                "ring4",
                "--random-weights",
                "--gamma-points",
                "5",
                "--beta-points",
                "4",
                "--shots",
                "200",
            ])
            .status()
            .unwrap();
        assert!(status.success());
    };
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    run(d1.path());
    run(d2.path());
    assert_eq!(
        read(&d1.path().join("landscape.csv")),
        read(&d2.path().join("landscape.csv")),
        "shot-sampled landscape must be byte-identical for equal seeds"
    );
    assert_eq!(
        read(&d1.path().join("landscape.json")),
        read(&d2.path().join("landscape.json")),
    );
}

#[test]
fn calibrate_sim_emits_sweeps() {
    let dir = tempfile::tempdir().unwrap();
    let out = xykit()
        .args(["--seed", "9", "--out-dir"])
        .arg(dir.path())
        .args(["calibrate-sim", "--hidden-phi0", "0.4", "--hidden-rz0", "0.1"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["calibration.json", "phi0_scan.csv", "second_pulse_scan.csv", "manifest.json"] {
        assert!(dir.path().join(f).exists(), "missing {f}");
    }
    let json: serde_json::Value =
        serde_json::from_str(&read(&dir.path().join("calibration.json"))).unwrap();
    assert!(json["residual"].as_f64().unwrap() < 1e-6);
}
