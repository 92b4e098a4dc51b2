//! End-to-end CLI tests: exit codes, determinism, atomicity, and the golden
//! regression for the runs exercising the core identities.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dnlslab"))
}

fn run_ok(args: &[&str], out: &Path, name: &str) -> PathBuf {
    let status = bin()
        .args(args)
        .arg("--out")
        .arg(out)
        .arg("--name")
        .arg(name)
        .status()
        .expect("binary runs");
    assert!(status.success(), "command {:?} failed", args);
    out.join(name)
}

/// Collect (relative path, bytes) for every artifact except the manifest,
/// whose wall-time field is run-dependent by design.
fn artifacts(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                if rel != "manifest.json" {
                    out.push((rel, fs::read(&path).unwrap()));
                }
            }
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    // unknown key -> 1, naming the key
    let out = bin()
        .args(["simulate", "--set", "bogus.key=1", "--out"])
        .arg(tmp.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus.key"));

    // malformed value -> 1
    let out = bin()
        .args(["simulate", "--set", "stepper.dt=\"soon\"", "--out"])
        .arg(tmp.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("stepper.dt"));

    // numerical abort -> 2, and no run directory at the final path
    let out = bin()
        .args([
            "simulate",
            "--set",
            "grid.n=16",
            "--set",
            "data.l2=80.0",
            "--set",
            "data.decay=0.05",
            "--set",
            "stepper.dt=0.5",
            "--set",
            "stepper.t_final=5.0",
            "--name",
            "blowup",
            "--out",
        ])
        .arg(tmp.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(!tmp.path().join("blowup").exists(), "aborted run must not publish a directory");
}

#[test]
fn verify_zero_data_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = run_ok(
        &["verify", "--set", "data.kind=zero", "--set", "grid.n=16", "--set", "verify.spectra=0",
          "--set", "stepper.t_final=0.05", "--set", "stepper.dt=0.005"],
        tmp.path(),
        "vzero",
    );
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["all_pass"], serde_json::Value::Bool(true));
}

#[test]
fn empty_trajectory_still_writes_valid_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = run_ok(
        &["simulate", "--set", "grid.n=16", "--set", "stepper.t_final=0.0"],
        tmp.path(),
        "t0",
    );
    let monitors = fs::read_to_string(dir.join("monitors.csv")).unwrap();
    assert!(monitors.starts_with("t,mass,momentum,energy\n"));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    assert!(manifest["files"].as_array().unwrap().len() >= 2);
}

#[test]
fn determinism_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let args = [
        "simulate",
        "--set",
        "grid.n=32",
        "--set",
        "stepper.t_final=0.1",
        "--set",
        "stepper.store_every=20",
        "--set",
        "data.seed=9",
    ];
    let a = run_ok(&args, tmp.path(), "run-a");
    let b = run_ok(&args, tmp.path(), "run-b");
    let fa = artifacts(&a);
    let fb = artifacts(&b);
    assert_eq!(fa.len(), fb.len());
    for ((ra, ba), (rb, bb)) in fa.iter().zip(&fb) {
        assert_eq!(ra, rb);
        assert_eq!(ba, bb, "artifact {ra} differs between identical runs");
    }
    // manifest checksums must also agree (they cover the artifacts)
    let ma: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
    let mb: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(b.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(ma["files"], mb["files"]);
}

#[test]
fn manifest_lists_every_artifact_with_checksum() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = run_ok(
        &["simulate", "--set", "grid.n=16", "--set", "stepper.t_final=0.05",
          "--set", "stepper.store_every=10"],
        tmp.path(),
        "chk",
    );
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    let listed: Vec<String> = manifest["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["path"].as_str().unwrap().to_string())
        .collect();
    for (rel, _) in artifacts(&dir) {
        assert!(listed.contains(&rel), "manifest missing {rel}");
    }
    for f in manifest["files"].as_array().unwrap() {
        assert_eq!(f["sha256"].as_str().unwrap().len(), 64);
    }
}

#[test]
fn spectrum_file_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    // run once, feed the final snapshot back in as file data
    let dir = run_ok(
        &["simulate", "--set", "grid.n=16", "--set", "stepper.t_final=0.05",
          "--set", "stepper.store_every=10"],
        tmp.path(),
        "src",
    );
    let snaps: Vec<_> = fs::read_dir(dir.join("snapshots")).unwrap().collect();
    let last = dir.join("snapshots").join(format!("snap_{:06}.csv", snaps.len() - 1));
    let set_file = format!("data.file=\"{}\"", last.display());
    let dir2 = run_ok(
        &["simulate", "--set", "grid.n=16", "--set", "data.kind=file", "--set", &set_file,
          "--set", "stepper.t_final=0.0"],
        tmp.path(),
        "replay",
    );
    let orig = fs::read_to_string(&last).unwrap();
    let replay = fs::read_to_string(dir2.join("snapshots/snap_000000.csv")).unwrap();
    // same coefficients modulo the header comment
    let tail = |s: &str| s.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n");
    assert_eq!(tail(&orig), tail(&replay));
}

// --------------------------------------------------------------------------
// Golden regression: committed outputs for the runs exercising criteria 1-5.
// Regenerate with scripts/regen_golden.sh after an intentional change.
// --------------------------------------------------------------------------

fn golden_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn compare_against_golden(fresh: &Path, golden: &Path) {
    let fa = artifacts(fresh);
    let fg = artifacts(golden);
    let names_a: Vec<&String> = fa.iter().map(|(r, _)| r).collect();
    let names_g: Vec<&String> = fg.iter().map(|(r, _)| r).collect();
    assert_eq!(names_a, names_g, "artifact sets differ from golden");
    for ((rel, fresh_bytes), (_, golden_bytes)) in fa.iter().zip(&fg) {
        assert_eq!(
            fresh_bytes, golden_bytes,
            "artifact {rel} deviates from the committed golden copy"
        );
    }
}

fn golden_args(case: &str) -> Vec<&'static str> {
    match case {
        // criterion 1: plane-wave evolution
        "pw" => vec![
            "simulate", "--set", "grid.n=32", "--set", "data.kind=plane_wave", "--set",
            "data.k=1", "--set", "stepper.t_final=0.1", "--set", "stepper.store_every=20",
        ],
        // criterion 2: conservation monitors on small smooth data
        "small" => vec![
            "simulate", "--set", "grid.n=32", "--set", "data.seed=9", "--set", "data.l2=0.3",
            "--set", "stepper.t_final=0.1", "--set", "stepper.store_every=20",
        ],
        // gauge flow artifacts (g series, criterion 6 machinery)
        "gauge" => vec![
            "simulate", "--set", "grid.n=16", "--set", "stepper.equation=gauge", "--set",
            "data.seed=4", "--set", "data.l2=0.3", "--set", "stepper.t_final=0.1", "--set",
            "stepper.store_every=20",
        ],
        // criteria 3-5: identity and residual values
        "verify" => vec![
            "verify", "--set", "grid.n=16", "--set", "verify.spectra=5", "--set",
            "data.seed=2", "--set", "data.l2=0.35", "--set", "stepper.dt=0.001", "--set",
            "stepper.t_final=0.1",
        ],
        _ => unreachable!(),
    }
}

#[test]
fn golden_regression() {
    let root = golden_root();
    assert!(root.exists(), "golden directory missing; run scripts/regen_golden.sh");
    let tmp = tempfile::tempdir().unwrap();
    for case in ["pw", "small", "gauge", "verify"] {
        let fresh = run_ok(&golden_args(case), tmp.path(), case);
        compare_against_golden(&fresh, &root.join(case));
    }
}
