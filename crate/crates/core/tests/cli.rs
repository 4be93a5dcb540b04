use std::fs;
use std::process::Command;

fn ratvol(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_ratvol")).args(args).output().unwrap()
}

#[test]
fn simulate_is_reproducible_and_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let out = ratvol(&["simulate", "-T", "50", "--seed", "7", "--out", p.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let (ta, tb) = (fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    assert_eq!(String::from_utf8(ta).unwrap().lines().count(), 51);

    let manifest = dir.path().join("a.csv.manifest.json");
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(manifest).unwrap()).unwrap();
    assert_eq!(m["subcommand"], "simulate");
    assert_eq!(m["seed"], 7);
}

#[test]
fn exit_codes() {
    assert_eq!(ratvol(&["simulate", "--a", "1.5"]).status.code(), Some(2));
    assert_eq!(ratvol(&["simulate", "--n-u", "2"]).status.code(), Some(2));
    assert_eq!(ratvol(&["moments", "--d", "6"]).status.code(), Some(2));
    assert_eq!(ratvol(&["moments"]).status.code(), Some(0));
}

#[test]
fn density_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("t.json");
    assert!(ratvol(&["density", "t", "--df", "3", "--out", t.to_str().unwrap()]).status.success());
    let out = ratvol(&["density", "eval", "--pdf", t.to_str().unwrap(), "--x", "0", "--x", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let vals: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    let want = |u: f64| 2.0 / (std::f64::consts::PI * (1.0 + u * u).powi(2));
    assert!((vals[0] - want(0.0)).abs() < 1e-12 && (vals[1] - want(2.0)).abs() < 1e-12, "{vals:?}");
}
