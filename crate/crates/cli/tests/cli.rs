use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn btdm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_btdm")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn configs() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs"))
}

#[test]
fn check_params_reports_full_scale_bounds() {
    let out = btdm(&["check-params", "--config", configs().join("full.toml").to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    for expected in ["kbar            25", "dof(kbar)       2500", "(220, 204)", "B0/Tc           0.2833"] {
        assert!(text.contains(expected), "missing {expected:?} in\n{text}");
    }
}

#[test]
fn encode_then_decode_roundtrips() {
    let dir = tempfile::tempdir().unwrap();
    let out = btdm(&["encode", "--t", "6", "--l", "2", "--bits", "b7c", "--ell", "12"]);
    assert!(out.status.success());
    let csv = stdout(&out);
    assert_eq!(csv.lines().count(), 6);
    assert!(csv.lines().all(|l| l.split(',').count() == 4));
    let path = dir.path().join("symbol.csv");
    fs::write(&path, csv).unwrap();
    let out = btdm(&["decode", "--t", "6", "--l", "2", "--ell", "12", "--matrix", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "b7c");
}

#[test]
fn bad_config_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    fs::write(&path, "t1 = 10\nunknown_key = 3\n").unwrap();
    let out = btdm(&["check-params", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let out = btdm(&["simulate", "--config", dir.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_matrix_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.csv");
    fs::write(&path, "1,0,0\n").unwrap();
    let out = btdm(&["decode", "--t", "4", "--l", "2", "--ell", "10", "--matrix", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("out.csv");
    let out = btdm(&[
        "simulate",
        "--config",
        configs().join("desk.toml").to_str().unwrap(),
        "--trials",
        "2",
        "--seed",
        "3",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("ebn0_db,K,G,sc_iters,trials,pupe_mean,pupe_ci95,mean_solver_iters,mean_runtime_ms,seed")
    );
    // four SNR points × three cancellation settings
    assert_eq!(lines.count(), 12);
}
