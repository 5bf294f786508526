// SPDX-License-Identifier: Apache-2.0

use std::path::Path;
use std::process::{Command, Output};

fn cmc(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cmc")).args(args).arg("--out").arg(out).output().expect("run cmc")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn verify_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let ra = cmc(&["verify", "--resolution", "16", "--seed", "3"], &a);
    let rb = cmc(&["verify", "--resolution", "16", "--seed", "3"], &b);
    assert_eq!(ra.status.code(), rb.status.code());
    let (a, b) = (std::fs::read(a.join("verify.json")).unwrap(), std::fs::read(b.join("verify.json")).unwrap());
    assert!(a == b, "verify.json differs between identical runs");
}

#[test]
fn tight_tolerances_fail_verify() {
    let dir = tempfile::tempdir().unwrap();
    let r = cmc(&["verify", "--resolution", "16", "--set", "tol.all=1e-15"], dir.path());
    assert_eq!(r.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&r.stdout).contains("FAIL"));
    let v = json(&dir.path().join("verify.json"));
    assert_eq!(v["kind"], "verify");
    assert!(v["report"]["failed"].as_u64().unwrap() > 0);
}

#[test]
fn bad_configuration_exits_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["analyze", "--resolution", "8"][..],
        &["analyze", "--set", "colour=red"],
        &["analyze", "--fixture", "dodecahedron"],
        &["analyze", "--fixture", "file:/nonexistent/grid.csv"],
        &["frobnicate"],
    ] {
        let r = cmc(args, dir.path());
        assert_eq!(r.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn invalid_sym_pair_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r");
    let r = cmc(&["reconstruct", "--fixture", "vacuum:1", "--lambda0", "2", "--resolution", "16"], &out);
    assert_eq!(r.status.code(), Some(2));
    assert!(!out.join("surface.obj").exists());
    assert!(!out.join("reconstruct.json").exists());
}

#[test]
fn reconstruct_vacuum_in_h3() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["reconstruct", "--fixture", "vacuum:1", "--space", "h3", "--lambda0", "0.5", "--resolution", "64"];
    let r = cmc(&args, dir.path());
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let obj = std::fs::read_to_string(dir.path().join("surface.obj")).unwrap();
    // The seam row and column are written twice since open surfaces do not close.
    assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 65 * 65);
    assert!(obj.lines().any(|l| l.starts_with("f ")));
    let rep = json(&dir.path().join("reconstruct.json"));
    assert_eq!(rep["schema_version"], 1);
    assert!(dir.path().join("vertices.csv").exists());
}

#[test]
fn analyze_reports_genus_and_violations() {
    let dir = tempfile::tempdir().unwrap();
    let clean = dir.path().join("clean");
    assert_eq!(cmc(&["analyze", "--resolution", "32"], &clean).status.code(), Some(0));
    let a = json(&clean.join("analyze.json"));
    assert_eq!(a["report"]["genus"]["geometric_genus"], 0);
    assert!(clean.join("trace_sweep_g1.csv").exists() && clean.join("trace_sweep_g2.csv").exists());

    let bent = dir.path().join("bent");
    assert_eq!(cmc(&["analyze", "--resolution", "32", "--perturbation", "0.05"], &bent).status.code(), Some(0));
    let b = json(&bent.join("analyze.json"));
    let v = &b["report"]["flatness_violation"];
    assert!(v["residual"].as_f64().unwrap() > v["threshold"].as_f64().unwrap());
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("run.conf");
    std::fs::write(&file, "# test run\nfixture = homogeneous:0.6\nresolution = 16\ntol.willmore = 1e-3\n").unwrap();
    let out = dir.path().join("o");
    let conf = file.to_str().unwrap();
    let r = cmc(&["analyze", "--config", conf, "--resolution", "32"], &out);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let a = json(&out.join("analyze.json"));
    assert_eq!(a["config"]["resolution"], 32);
    assert_eq!(a["config"]["fixture"]["r"], 0.6);
    assert_eq!(a["config"]["tolerances"]["willmore"], 1e-3);
}
