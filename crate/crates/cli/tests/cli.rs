mod common;

use abacus_core::chain::{integerize, parse_chain};
use abacus_core::fixtures::{DRIFT_WALK, ONE_STEP, SYMMETRIC_WALK};
use abacus_core::oracle::matrix_solve;
use abacus_core::Rational;
use common::{abacus, p, stderr, stdout, Workspace};
use serde_json::Value;

fn fractions(v: &Value) -> Vec<Rational> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_str().unwrap().parse().unwrap())
        .collect()
}

#[test]
fn json_fractions_round_trip_to_exact_matrices() {
    let ws = Workspace::new();
    for (name, text) in [("drift.chain", DRIFT_WALK), ("sym.chain", SYMMETRIC_WALK), ("one.chain", ONE_STEP)] {
        let f = ws.file(name, text);
        let out = abacus(&["solve", p(&f), "--format", "json"]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
        assert_eq!(doc["agree"], Value::Bool(true));
        let exact = matrix_solve(&parse_chain(text).unwrap()).unwrap();
        for (i, row) in doc["rows"].as_array().unwrap().iter().enumerate() {
            assert_eq!(fractions(&row["N"]), exact.n.row(i));
            assert_eq!(fractions(&row["B"]), exact.b.row(i));
            // approximations carry at least 12 significant digits
            for s in row["N_approx"].as_array().unwrap() {
                let digits = s.as_str().unwrap().chars().filter(char::is_ascii_digit).count();
                assert!(digits >= 12);
            }
        }
    }
}

#[test]
fn solve_single_row_json() {
    let ws = Workspace::new();
    let f = ws.file("drift.chain", DRIFT_WALK);
    let out = abacus(&["solve", p(&f), "--start", "1", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["start"], 1);
    assert_eq!(rows[0]["N"], serde_json::json!(["9/7", "6/7"]));
    assert_eq!(rows[0]["B"], serde_json::json!(["3/7", "4/7"]));
    assert_eq!(rows[0]["run"]["m"], "7");
    assert_eq!(rows[0]["run"]["v_total"], "7");
}

#[test]
fn solve_methods() {
    let ws = Workspace::new();
    let f = ws.file("drift.chain", DRIFT_WALK);
    for method in ["abacus", "matrix", "both"] {
        let out = abacus(&["solve", p(&f), "--method", method, "--format", "json"]);
        assert_eq!(out.status.code(), Some(0));
        let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
        assert_eq!(doc["method"], method);
        assert_eq!(doc["rows"][1]["N"], serde_json::json!(["3/7", "9/7"]));
        assert_eq!(doc["rows"][0].get("run").is_some(), method != "matrix");
        assert_eq!(doc.get("agree").is_some(), method == "both");
    }
    let text = stdout(&abacus(&["solve", p(&f)]));
    assert!(text.contains("abacus and matrix results agree"));
    assert!(text.contains("1  9/7  6/7"));
}

#[test]
fn input_errors_exit_two() {
    let ws = Workspace::new();
    let bad_sum = ws.file("bad.chain", "states: 3\nabsorbing: 0\nrow 1: 0:1/2 2:1/3\nrow 2: 0:1\n");
    let out = abacus(&["solve", p(&bad_sum)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("sums to 5/6"));

    let syntax = ws.file("syn.chain", "states: 2\nabsorbing: 1\nrow 0: 1:1/x\n");
    let out = abacus(&["trace", p(&syntax), "--start", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3"));

    let drift = ws.file("drift.chain", DRIFT_WALK);
    let out = abacus(&["solve", p(&drift), "--start", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let out = abacus(&["solve", p(&ws.path().join("missing.chain"))]);
    assert_eq!(out.status.code(), Some(2));
    let out = abacus(&["verify", p(&bad_sum)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn trace_shapes() {
    let ws = Workspace::new();
    let one = ws.file("one.chain", ONE_STEP);
    let out = abacus(&["trace", p(&one), "--start", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "State  0  1  Move\nStart  1  0  1_0\n       0  1  2\nFinal  1  1\n");

    let drift = ws.file("drift.chain", DRIFT_WALK);
    let out = stdout(&abacus(&["trace", p(&drift), "--start", "2"]));
    let last = out.lines().last().unwrap();
    let chain = integerize(&parse_chain(DRIFT_WALK).unwrap()).unwrap();
    let critical = abacus_core::engine::critical_loading(&chain, 2).unwrap();
    assert_eq!(critical.transient(), &[2, 3]);
    let cells: Vec<&str> = last.split_whitespace().collect();
    assert_eq!(cells[0], "Final");
    assert_eq!((cells[2], cells[3]), ("2", "3"));

    // without --start the file's start state is used
    assert_eq!(stdout(&abacus(&["trace", p(&drift)])), stdout(&abacus(&["trace", p(&drift), "--start", "1"])));
    let sym = ws.file("sym.chain", SYMMETRIC_WALK);
    assert_eq!(abacus(&["trace", p(&sym)]).status.code(), Some(2));
}

#[test]
fn oracle_command() {
    let ws = Workspace::new();
    let f = ws.file("drift.chain", DRIFT_WALK);
    let doc: Value = serde_json::from_str(&stdout(&abacus(&["oracle", p(&f), "--format", "json"]))).unwrap();
    assert_eq!(doc["Q"], serde_json::json!([["0", "2/3"], ["1/3", "0"]]));
    assert_eq!(doc["B"], serde_json::json!([["3/7", "4/7"], ["1/7", "6/7"]]));
    assert!(stdout(&abacus(&["oracle", p(&f)])).contains("N = (I - Q)^-1"));
}

#[test]
fn verify_and_generate() {
    let ws = Workspace::new();
    let dir = ws.path().join("corpus");
    let out = abacus(&["generate", "--out", p(&dir), "--count", "20", "--seed", "5"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).lines().count(), 20);
    let out = abacus(&["verify", "--chains-dir", p(&dir), "--format", "json"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["passed"], true);
    assert_eq!(doc["chains"].as_array().unwrap().len(), 20);

    let drift = ws.file("drift.chain", DRIFT_WALK);
    let out = abacus(&["verify", p(&drift)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("summary: 1/1 chains passed"));
    assert_eq!(abacus(&["verify"]).status.code(), Some(2));
    assert_eq!(abacus(&["verify", p(&drift), "--budget", "4"]).status.code(), Some(3));
}

#[test]
fn simulate_command() {
    let ws = Workspace::new();
    let f = ws.file("drift.chain", DRIFT_WALK);
    let out = abacus(&["simulate", p(&f), "--trials", "1", "--seed", "3", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let freqs: Vec<f64> = doc["absorption"]
        .as_array()
        .unwrap()
        .iter()
        .map(|l| l["estimate"].as_str().unwrap().parse().unwrap())
        .collect();
    assert_eq!(freqs.iter().sum::<f64>(), 1.0);
    assert!(freqs.iter().all(|&f| f == 0.0 || f == 1.0));
    assert_eq!(abacus(&["simulate", p(&f), "--trials", "0"]).status.code(), Some(2));
    assert_eq!(abacus(&["simulate", p(&f), "--start", "3"]).status.code(), Some(2));
}
