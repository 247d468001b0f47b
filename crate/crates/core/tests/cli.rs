//! End-to-end checks of the `mbpf` binary.

use std::path::Path;
use std::process::{Command, Output};

fn mbpf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mbpf")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn out_dir(dir: &Path) -> &str {
    dir.to_str().unwrap()
}

#[test]
fn run_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let text = stdout(&mbpf(&[
        "run",
        "--scenario",
        "line3-1ch",
        "--policy",
        "dp-exact",
        "--runs",
        "3",
        "--iters",
        "2000",
        "--seed",
        "7",
        "--out-dir",
        out_dir(dir.path()),
    ]));
    assert!(text.contains("sum w ln r"));
    assert!(text.contains("stddev"));
    let csv = std::fs::read_to_string(dir.path().join("line3-1ch_dp-exact_server.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("run_id,policy,scheme,t,T,U,weighted_throughput"));
    // t = 0, 1000, 2000 for each of three runs.
    assert_eq!(lines.count(), 9);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("line3-1ch_dp-exact_server.json")).unwrap())
            .unwrap();
    assert_eq!(json["results"].as_array().unwrap().len(), 3);
    assert_eq!(json["results"][0]["clients"].as_array().unwrap().len(), 16);
}

#[test]
fn zero_iterations_reports_initialization() {
    let dir = tempfile::tempdir().unwrap();
    stdout(&mbpf(&[
        "run",
        "--scenario",
        "line3-2ch",
        "--policy",
        "greedy",
        "--iters",
        "0",
        "--runs",
        "2",
        "--out-dir",
        out_dir(dir.path()),
    ]));
    let csv = std::fs::read_to_string(dir.path().join("line3-2ch_greedy_server.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    for row in rows {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields[3], "0");
        // Greedy has no temperature.
        assert_eq!(fields[4], "");
    }
}

#[test]
fn enumerate_reports_optimum() {
    let text = stdout(&mbpf(&["enumerate", "--scenario", "micro"]));
    assert!(text.contains("U* = 5.935224828"));
    let json: serde_json::Value =
        serde_json::from_str(&stdout(&mbpf(&["enumerate", "--scenario", "micro", "--json"]))).unwrap();
    assert!((json["energy"].as_f64().unwrap() - 5.935224828785106).abs() < 1e-12);
    assert_eq!(json["channels"][1][1], "16ghz");
}

#[test]
fn enumerate_refuses_large_scenarios() {
    let out = mbpf(&["enumerate", "--scenario", "line3-2ch"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("exceeds the limit"));
}

#[test]
fn annealer_matches_enumeration_on_micro() {
    let dir = tempfile::tempdir().unwrap();
    let text = stdout(&mbpf(&[
        "run",
        "--scenario",
        "micro",
        "--policy",
        "dp-exact",
        "--runs",
        "5",
        "--out-dir",
        out_dir(dir.path()),
    ]));
    assert!(text.contains("mean 5.935225  stddev 0.000000"), "{text}");
}

#[test]
fn bad_input_is_rejected() {
    for args in [
        &["run", "--scenario", "no-such-scenario"][..],
        &["run", "--scenario", "micro", "--policy", "annealing"],
        &["run", "--scenario", "micro", "--schedule", "geometric:2"],
        &[
            "run",
            "--scenario",
            "micro",
            "--policy",
            "minint-wifi",
            "--scheme",
            "client",
        ],
        &["run", "--scenario", "micro", "--runs", "0"],
    ] {
        let out = mbpf(args);
        assert!(!out.status.success(), "{args:?} should fail");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn scenario_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.toml");
    std::fs::write(
        &path,
        stdout(&mbpf(&["show", "--scenario", "grid16-weighted", "--seed", "3"])),
    )
    .unwrap();
    let from_file = stdout(&mbpf(&["show", "--scenario", path.to_str().unwrap()]));
    assert_eq!(from_file, std::fs::read_to_string(&path).unwrap());
    let run_dir = dir.path().join("out");
    stdout(&mbpf(&[
        "run",
        "--scenario",
        path.to_str().unwrap(),
        "--policy",
        "minint-wifi",
        "--runs",
        "1",
        "--out-dir",
        run_dir.to_str().unwrap(),
    ]));
    assert!(run_dir.join("grid16-weighted_minint-wifi_server.csv").exists());
}
