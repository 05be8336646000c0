//! End-to-end runs of the `gfh` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn gfh(args: &[&str], extra: &[&Path]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gfh")).args(args).args(extra).output().expect("run gfh")
}

fn scene(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenes").join(name)
}

fn read(p: &Path) -> Vec<u8> {
    std::fs::read(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

#[test]
fn report_is_deterministic() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let out = gfh(&["report", "--scene"], &[&scene("rotation_cp12.toml"), Path::new("--out"), d.path()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for f in ["scene.toml", "spectrum.json", "barcode.json", "barcode.svg", "invariants.json", "verify.json"] {
        assert_eq!(read(&dirs[0].path().join(f)), read(&dirs[1].path().join(f)), "{f} differs");
    }
    let v: serde_json::Value = serde_json::from_slice(&read(&dirs[0].path().join("verify.json"))).unwrap();
    assert_eq!(v["failed"], 0);
    assert_eq!(v["undecided"], 0);
}

#[test]
fn barcode_replay_round_trips() {
    let d = tempfile::tempdir().unwrap();
    let first = d.path().join("a");
    let out = gfh(&["barcode", "--scene"], &[&scene("rotation_cp111.toml"), Path::new("--out"), &first]);
    assert!(out.status.success());
    let second = d.path().join("b");
    let out = gfh(&["barcode", "--barcode"], &[&first.join("barcode.json"), Path::new("--out"), &second]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(read(&first.join("barcode.svg")), read(&second.join("barcode.svg")));
    let out = gfh(&["verify", "--barcode"], &[&second.join("barcode.json"), Path::new("--out"), &second]);
    assert!(out.status.success());
}

#[test]
fn exit_codes() {
    let d = tempfile::tempdir().unwrap();
    // Usage error.
    assert_eq!(gfh(&["spectrum", "--bogus"], &[]).status.code(), Some(64));
    // Field gate: 2 divides a weight.
    let out =
        gfh(&["spectrum", "--field", "f2", "--scene"], &[&scene("rotation_cp12.toml"), Path::new("--out"), d.path()]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["error"].is_string());
    // Unreadable scene.
    assert_eq!(gfh(&["spectrum", "--scene"], &[&d.path().join("missing.toml")]).status.code(), Some(4));
    // Corrupted barcode: a bar of length one.
    let bad = d.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"total_weight":1,"field":"q","finite":[{"birth":0.5,"death":1.5,"degree":1}],"infinite":[{"birth":0.0,"degree":0}]}"#,
    )
    .unwrap();
    assert_eq!(gfh(&["verify", "--barcode"], &[&bad, Path::new("--out"), d.path()]).status.code(), Some(3));
}

#[test]
fn identity_scene_reports_infinitely_many_fixed_points() {
    let d = tempfile::tempdir().unwrap();
    let out = gfh(&["invariants", "--scene"], &[&scene("identity_cp1.toml"), Path::new("--out"), d.path()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&read(&d.path().join("invariants.json"))).unwrap();
    let s = v.to_string();
    assert!(s.contains("infinitely_many_fixed_points"), "{s}");
}
