use std::process::{Command, Output};

use chbound_cli::OutputRecord;

fn chbound(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chbound"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> OutputRecord {
    let out = chbound(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn bounds_json() {
    let r = json(&["bounds", "--n", "3"]);
    assert_eq!(r.command, "bounds");
    assert_eq!(r.version, 1);
    assert_eq!(r.table.unwrap().rows, vec![vec![2.0, 2.0 / 3.0], vec![3.0, 0.6]]);
}

#[test]
fn bounds_csv() {
    let out = chbound(&["bounds", "--n", "2", "--format", "csv"]);
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "n,critical_eta\n2.0,0.6666666666666666\n"
    );
}

#[test]
fn delta_reports_critical_eta() {
    let r = json(&["delta", "--n", "2", "--epsilon", "0.1"]);
    assert!((r.results["critical_eta"] - 2.0 / 3.0 * 1.01).abs() < 1e-9);
    assert_eq!(r.parameters["n"], 2);
}

#[test]
fn delta_rejects_zero_epsilon() {
    let out = chbound(&["delta", "--n", "2", "--epsilon", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("epsilon"));
}

#[test]
fn lhv_certifies_and_guards() {
    let r = json(&["lhv", "--n", "4", "--eta", "0.5"]);
    assert_eq!(r.results["certified"], 1.0);
    let r = json(&["lhv", "--n", "3", "--eta", "0.3,0.7,1.0"]);
    assert!(r.results["max_residual"] <= 0.0);
    assert_eq!(r.results["strategies_checked"], 64.0);
    let out = chbound(&["lhv", "--n", "13"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn scan_rejects_zero_steps() {
    let out = chbound(&[
        "scan",
        "--n",
        "2",
        "--eta-min",
        "0.6",
        "--eta-max",
        "0.8",
        "--steps",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn scan_csv_flags_transition() {
    let out = chbound(&[
        "scan",
        "--n",
        "2",
        "--eta-min",
        "0.6",
        "--eta-max",
        "0.8",
        "--steps",
        "21",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("eta,best_theta,best_eigenvalue,violation"));
    let flags: Vec<(f64, bool)> = lines
        .map(|l| {
            let cells: Vec<f64> = l.split(',').map(|c| c.parse().unwrap()).collect();
            (cells[0], cells[3] == 1.0)
        })
        .collect();
    assert_eq!(flags.len(), 21);
    let first = flags.iter().find(|(_, v)| *v).unwrap().0;
    assert!(first > 0.66 && first <= 0.68);
}

#[test]
fn compare_rejects_four_sites() {
    assert_eq!(chbound(&["compare", "--n", "4"]).status.code(), Some(2));
}

#[test]
fn compare_single_eta() {
    let r = json(&["compare", "--n", "2", "--eta", "0.75"]);
    let rows = r.table.unwrap().rows;
    assert_eq!(rows.len(), 1);
    assert!((0.75..=0.85).contains(&rows[0][1]));
}

#[test]
fn unknown_flag_is_usage_error() {
    assert_eq!(chbound(&["bounds", "--bogus"]).status.code(), Some(2));
}

#[test]
fn output_is_deterministic() {
    let args = [
        "scan",
        "--n",
        "3",
        "--eta-min",
        "0.55",
        "--eta-max",
        "0.7",
        "--steps",
        "4",
    ];
    assert_eq!(chbound(&args).stdout, chbound(&args).stdout);
}
