// Copyright 2026 lindsym Contributors
// SPDX-License-Identifier: Apache-2.0

use std::process::{Command, Output};

fn lindsym(args: &[&str], out: &std::path::Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lindsym"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

#[test]
fn config_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.toml");
    std::fs::write(&bad, "[model]\nunknown_key = 1\n").unwrap();
    for args in [
        vec!["dims", "--lattice", "1x3"],
        vec!["steady", "--gamma", "0"],
        vec!["steady", "--sector", "even", "--hx", "0.1"],
        vec!["sweep", "--step", "0"],
        vec!["steady", "--config", bad.to_str().unwrap()],
    ] {
        let o = lindsym(&args, tmp.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn broken_symmetry_exits_5() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("p.toml");
    std::fs::write(&cfg, "[model]\nperturb_bond = 1\nperturb_delta = 0.05\n").unwrap();
    let o = lindsym(&["verify", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&o.stderr).contains("weak_symmetry_structural"));
    // the symmetric model passes every check
    let o = lindsym(&["verify", "--lattice", "4"], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn dark_state_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let o = lindsym(&["steady", "--lattice", "2x3", "--jx", "0", "--jy", "0", "--jz", "0"], tmp.path());
    assert!(o.status.success());
    let mut r = csv::Reader::from_path(tmp.path().join("summary.csv")).unwrap();
    let header = r.headers().unwrap().clone();
    let row = r.records().next().unwrap().unwrap();
    let get = |k: &str| row[header.iter().position(|h| h == k).unwrap()].to_string();
    assert_eq!(get("nonzero_even"), "1");
    assert_eq!(get("mz").parse::<f64>().unwrap(), -1.0);
}

#[test]
fn sweep_row_counts() {
    let tmp = tempfile::tempdir().unwrap();
    for (args, rows) in [
        (vec!["sweep", "--start", "0.8", "--stop", "1.2", "--step", "0.05"], 9),
        (vec!["sweep", "--start", "1.0", "--stop", "1.0", "--step", "0.05"], 1),
    ] {
        let o = lindsym(&args, tmp.path());
        assert!(o.status.success());
        let n = csv::Reader::from_path(tmp.path().join("sweep.csv")).unwrap().records().count();
        assert_eq!(n, rows);
    }
}

#[test]
fn failed_sweep_points_are_recorded() {
    let tmp = tempfile::tempdir().unwrap();
    // gamma = 0 at the first point only
    let o = lindsym(
        &["sweep", "--param", "gamma", "--start", "0", "--stop", "1", "--step", "0.5"],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut r = csv::Reader::from_path(tmp.path().join("sweep.csv")).unwrap();
    let status: Vec<String> = r.records().map(|rec| rec.unwrap()[7].to_string()).collect();
    assert!(status[0].starts_with("error 2"));
    assert_eq!(&status[1..], ["ok", "ok"]);
}
