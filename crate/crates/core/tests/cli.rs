use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stratlearn")).current_dir(dir).args(args).output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn same_seed_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for name in ["a.json", "b.json"] {
        assert!(run(d, &["gen", "--dim", "3", "--n", "40", "--seed", "9", "--out", name]).status.success());
    }
    let a = std::fs::read(d.join("a.json")).unwrap();
    assert_eq!(a, std::fs::read(d.join("b.json")).unwrap());
    assert!(d.join("a.json.meta").exists());

    for name in ["s1.json", "s2.json"] {
        assert!(run(d, &["solve", "--instance", "a.json", "--out", name]).status.success());
    }
    assert_eq!(std::fs::read(d.join("s1.json")).unwrap(), std::fs::read(d.join("s2.json")).unwrap());
}

#[test]
fn solve_then_eval_with_audit() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(run(d, &["gen", "--dim", "2", "--n", "25", "--seed", "1", "--out", "inst.json"]).status.success());
    assert!(run(d, &["solve", "--instance", "inst.json", "--out", "sol.json"]).status.success());
    let doc = json_of(&run(d, &["eval", "--instance", "inst.json", "--classifier", "sol.json", "--audit", "audit.csv"]));
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["result"]["strategic_loss"], 0.0);
    let csv = std::fs::read_to_string(d.join("audit.csv")).unwrap();
    assert_eq!(csv.lines().count(), 26);
}

#[test]
fn regime_mismatch_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(run(d, &["gen", "--dim", "2", "--n", "30", "--regime", "general", "--out", "g.json"]).status.success());
    let out = run(d, &["solve", "--instance", "g.json", "--solver", "invariant"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn bad_paths_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(run(d, &["solve", "--instance", "missing.json"]).status.code(), Some(2));
    assert_eq!(run(d, &["gen", "--dim", "2", "--n", "5", "--out", "no/such/dir.json"]).status.code(), Some(2));
}

#[test]
fn polygon_construction_shatters_three() {
    let dir = tempfile::tempdir().unwrap();
    let doc = json_of(&run(dir.path(), &["shatter", "--construction", "polygons", "--n", "3"]));
    assert_eq!(doc["result"]["report"]["sigma"], 8);
    assert_eq!(doc["result"]["shattered"], true);
}

#[test]
fn power_set_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let doc = json_of(&run(dir.path(), &["shatter", "--construction", "power-set", "--n", "3"]));
    assert_eq!(doc["result"]["svc"], 3);
    assert_eq!(doc["result"]["vc"], 1);
}

#[test]
fn hardness_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let yes = json_of(&run(d, &["hardness", "--c", "1,1,2", "--instance-out", "red.json"]));
    assert_eq!(yes["result"]["verdict"], "yes");
    assert_eq!(yes["result"]["certificate_verified"], true);
    assert!(d.join("red.json").exists());
    let no = json_of(&run(d, &["hardness", "--c", "1,2,4"]));
    assert_eq!(no["result"]["verdict"], "no");
    assert_eq!(run(d, &["hardness", "--c", "1,1", "--setting", "sideways"]).status.code(), Some(2));
}

#[test]
fn zero_cost_witness_has_positive_gap() {
    let dir = tempfile::tempdir().unwrap();
    let doc = json_of(&run(dir.path(), &["rand-gap", "--witness", "zero-cost", "--budget", "2000"]));
    assert!(doc["result"]["gap"].as_f64().unwrap() > 0.0);
}

#[test]
fn learning_curve_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let args = ["learning-curve", "--schedule", "5,20", "--seeds", "2", "--test-size", "200", "--csv", "curve.csv"];
    let doc = json_of(&run(d, &args));
    assert_eq!(doc["result"]["runs"].as_array().unwrap().len(), 4);
    let csv = std::fs::read_to_string(d.join("curve.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}
