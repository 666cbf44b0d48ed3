use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn proofware(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_proofware"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn missing_scenario_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let out = proofware(&["sweep", "--scenario", "does/not/exist.toml", "--out", dir.path().to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(stderr(&out).starts_with("error:"), "{}", stderr(&out));
    assert!(!dir.path().join("simulated.csv").exists());
}

#[test]
fn invalid_scenario_field_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    fs::write(&path, "botCount = 0\n").unwrap();
    let out = proofware(&["gas-study", "--scenario", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(!out.status.success());
}

#[test]
fn one_day_gas_study() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("one.json");
    fs::write(&path, r#"{"days": 1, "botCount": 40, "dailyTxRange": [100, 100]}"#).unwrap();
    let out = proofware(&["gas-study", "--scenario", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).starts_with("modularity "));
    let csv = fs::read_to_string(dir.path().join("Nov_Sum.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("100,") && lines[1].ends_with(",2018-11-01"));
    assert!(dir.path().join("edges.txt").exists());
}

fn trade(dir: &std::path::Path, direction: &str, amount: &str) -> Output {
    proofware(&[
        "trade",
        "--credit",
        "ourtube",
        "--direction",
        direction,
        "--amount",
        amount,
        "--out",
        dir.to_str().unwrap(),
    ])
}

#[test]
fn trades_persist_between_invocations() {
    let dir = tempfile::tempdir().unwrap();
    let first = trade(dir.path(), "buy", "100");
    assert!(first.status.success(), "{}", stderr(&first));
    let bought: Value = serde_json::from_str(&stdout(&first)).unwrap();
    assert_eq!(bought["direction"], "buy");
    let tokens = bought["output"].as_str().unwrap().to_string();

    let second = trade(dir.path(), "sell", &tokens);
    assert!(second.status.success(), "{}", stderr(&second));
    let sold: Value = serde_json::from_str(&stdout(&second)).unwrap();
    let returned: f64 = sold["output"].as_str().unwrap().parse().unwrap();
    assert!(returned <= 100.0 && returned > 99.99, "{returned}");

    let log = fs::read_to_string(dir.path().join("trade_log.csv")).unwrap();
    assert_eq!(log.lines().count(), 3, "{log}");
    assert!(dir.path().join("ledger.jsonl").exists());
}

#[test]
fn overselling_fails_without_touching_the_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    assert!(trade(dir.path(), "buy", "1").status.success());
    let snapshot = fs::read(dir.path().join("ledger.jsonl")).unwrap();
    let out = trade(dir.path(), "sell", "5000");
    assert!(!out.status.success());
    assert!(stderr(&out).contains("insufficient-balance"), "{}", stderr(&out));
    assert_eq!(fs::read(dir.path().join("ledger.jsonl")).unwrap(), snapshot);
}

#[test]
fn unknown_credit_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = proofware(&["trade", "--credit", "nope", "--direction", "buy", "--amount", "1", "--out", dir.path().to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("unknown-credit"));
}

#[test]
fn swap_demo_audit_ends_with_both_redeems() {
    let dir = tempfile::tempdir().unwrap();
    let out = proofware(&["swap-demo", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "blockHeight,contractId,operation,outcome");
    assert!(rows[rows.len() - 2..].iter().all(|r| r.ends_with(",redeem,Redeemed")));
    assert_eq!(fs::read_to_string(dir.path().join("swap_audit.csv")).unwrap(), text);
}

#[test]
fn swap_demo_rejects_a_one_block_margin() {
    let dir = tempfile::tempdir().unwrap();
    let out = proofware(&["swap-demo", "--delta", "1", "--out", dir.path().to_str().unwrap()]);
    assert!(!out.status.success());
}
