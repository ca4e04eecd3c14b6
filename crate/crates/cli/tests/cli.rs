use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ltf(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ltf")).args(args).arg("--out").arg(out).output().expect("running ltf")
}

fn summary(out: &Path, name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join(format!("{name}.summary.json"))).unwrap()).unwrap()
}

#[test]
fn identities_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let first = ltf(a.path(), &["identities", "--seed", "7"]);
    let second = ltf(b.path(), &["identities", "--seed", "7", "--threads", "3"]);
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    assert!(second.status.success());
    let csv_a = fs::read(a.path().join("identities.csv")).unwrap();
    assert_eq!(csv_a, fs::read(b.path().join("identities.csv")).unwrap());
    let other = tempfile::tempdir().unwrap();
    ltf(other.path(), &["identities", "--seed", "8"]);
    assert_ne!(csv_a, fs::read(other.path().join("identities.csv")).unwrap());
    let s = summary(a.path(), "identities");
    assert_eq!(s["pass"], true);
    assert_eq!(s["failed"], 0);
}

#[test]
fn unreachable_tolerance_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tight.toml");
    fs::write(&cfg, "version = 1\n[identities]\nsamples = 20\nunitary_samples = 10\nform_tol = 1e-20\nf_identity_tol = 1e-20\nunitary_tol = 1e-20\n").unwrap();
    let out = ltf(dir.path(), &["identities", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let s = summary(dir.path(), "identities");
    assert_eq!(s["pass"], false);
    assert!(s["failed"].as_u64().unwrap() > 0);
    let csv = fs::read_to_string(dir.path().join("identities.csv")).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("unitary/") && l.ends_with(",false")));

    let scaled = ltf(dir.path(), &["stationary", "--tol-scale", "1e-20"]);
    assert_eq!(scaled.status.code(), Some(1));
}

#[test]
fn stationary_passes_and_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let out = ltf(dir.path(), &["stationary"]);
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("stationary.csv")).unwrap();
    assert_eq!(csv.lines().count(), 17);

    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[stationary]\nf0 = [1.0, 0.0]\n").unwrap();
    let out = ltf(dir.path(), &["stationary", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("stationary.f0"));

    fs::write(&cfg, "version = 1\n[stationary]\nf_zero = [1.0]\n").unwrap();
    let out = ltf(dir.path(), &["stationary", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("f_zero") && err.contains("line 3"), "{err}");
}

#[test]
fn single_point_grid_marks_slope_not_applicable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("quick.toml");
    fs::write(&cfg, "[oscillatory]\nstability = false\ncalibration = false\n").unwrap();
    let out = ltf(dir.path(), &["oscillatory", "--config", cfg.to_str().unwrap(), "--lambda-grid", "50:50:1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let csv = fs::read_to_string(dir.path().join("oscillatory.csv")).unwrap();
    let slope = csv.lines().find(|l| l.starts_with("slope,")).unwrap();
    assert!(slope.ends_with("n/a,n/a,n/a,n/a,n/a,n/a,n/a,n/a"), "{slope}");
    assert!(csv.contains("ratio/l=000050.000"));
}

#[test]
fn cp1_runs_and_report_merges() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cp1.toml");
    fs::write(&cfg, "version = 1\n[cp1]\nprofile_lambda = [100.0, 200.0]\ndecay_lambda = [100.0, 200.0]\ndecay_radii = [0.5]\n").unwrap();
    let c = cfg.to_str().unwrap();
    for cmd in [&["cp1", "profile"][..], &["cp1", "negative"], &["cp1", "decay"]] {
        let mut args = cmd.to_vec();
        args.extend(["--config", c]);
        let out = ltf(dir.path(), &args);
        assert!(out.status.success(), "{:?}: {}", cmd, String::from_utf8_lossy(&out.stdout));
    }
    let out = ltf(dir.path(), &["report"]);
    assert!(out.status.success());
    let acc: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("acceptance.json")).unwrap()).unwrap();
    assert_eq!(acc["pass"], true);
    let names: Vec<&String> = acc["commands"].as_object().unwrap().keys().collect();
    assert_eq!(names, ["cp1-decay", "cp1-negative", "cp1-profile"]);
    let profile = fs::read_to_string(dir.path().join("cp1-profile.csv")).unwrap();
    assert!(profile.lines().any(|l| l.starts_with("parity/trend,") && l.ends_with(",true")));
}

#[test]
fn report_without_summaries_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = ltf(dir.path(), &["report"]);
    assert_eq!(out.status.code(), Some(1));
}
