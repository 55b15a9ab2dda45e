use std::process::{Command, Output};

use serde_json::Value;

fn symkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symkit")).args(args).output().expect("runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(args: &[&str]) -> (Value, i32) {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    let o = symkit(&all);
    (serde_json::from_slice(&o.stdout).expect("json output"), o.status.code().unwrap())
}

#[test]
fn classify_examples() {
    let o = symkit(&["classify", "stab:partition:pairs"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("C_Q"));
    let o = symkit(&["classify", "full"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("C_S"));
}

#[test]
fn classify_json_record() {
    let (v, code) = json(&["classify", "stab:partition:intervals-growing"]);
    assert_eq!(code, 0);
    assert_eq!(v["label"], "C_P");
    assert_eq!(v["lambda_case"], "aleph0");
    assert_eq!(v["evidence_check"], "passed");
    assert!(v["probes"].as_array().unwrap().len() > 1);
}

#[test]
fn unknown_exits_two() {
    let (v, code) = json(&["classify", "fn:metric:sqrt"]);
    assert_eq!(code, 2);
    assert_eq!(v["label"], "Unknown");
    assert_eq!(v["metric_case"], "CaseII");
    assert_eq!(symkit(&["compact", "oracle:pairs"]).status.code(), Some(2));
}

#[test]
fn parse_errors_exit_one_with_position() {
    let o = symkit(&["classify", "fix(full;1,x)"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("position 11"));
}

#[test]
fn orbit_example() {
    let o = symkit(&["orbit", "stab:partition:pairs", "--gamma", "1", "--alpha", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "{0}");
    let (v, _) = json(&["orbit", "full", "--gamma", "0,1", "--alpha", "5", "--budget", "8"]);
    assert_eq!(v["result"]["kind"], "at-least");
    assert_eq!(v["result"]["value"], 8);
}

#[test]
fn perm_commands() {
    let o = symkit(&["perm", "eval", "cycles:(0 1 2)", "--points", "0,2"]);
    assert_eq!(stdout(&o), "0 -> 1\n2 -> 0\n");
    let (v, code) = json(&["perm", "verify", "rule:shift-z", "--window", "200"]);
    assert_eq!((v["passed"].as_bool(), code), (Some(true), 0));
}

#[test]
fn random_permutations_follow_the_seed() {
    let a = stdout(&symkit(&["perm", "random", "--count", "3", "--seed", "7"]));
    let b = stdout(&symkit(&["perm", "random", "--count", "3", "--seed", "7"]));
    let c = stdout(&symkit(&["perm", "random", "--count", "3", "--seed", "8"]));
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_eq!(a.lines().count(), 3);
}

#[test]
fn metric_commands() {
    let (v, code) = json(&["metric", "classify", "metric:discrete"]);
    assert_eq!((v["case"].as_str(), code), (Some("CaseIV"), 0));
    let (v, _) = json(&["metric", "flow", "rule:shift-z"]);
    assert_eq!(v["common_value"], 1);
    let (v, _) = json(&["metric", "norm", "metric:standard-omega", "cycles:(0 5)"]);
    assert_eq!(v["certificate"]["kind"], "certified-finite");
    let (v, _) = json(&["metric", "factor", "cycles:(0 1 2)"]);
    assert_eq!(v["product_agrees"], true);
    let (v, _) = json(&["metric", "refine", "metric:standard-omega", "--u", "cycles:(0 9)", "--a", "0", "--b", "9"]);
    assert_eq!(v["distance"], serde_json::json!({"kind": "exact", "value": "1"}));
}

#[test]
fn local_commands() {
    let (v, _) = json(&["local", "decompose", "cycles:(0 1 2)", "--count", "3"]);
    assert_eq!(v["g"], "cycles:(0 2)");
    assert_eq!(v["h"], "cycles:(1 2)");
    let o = symkit(&["local", "breakpoints", "identity", "--count", "3"]);
    assert_eq!(stdout(&o).trim(), "[0, 1, 2, 3]");
    let (v, _) = json(&["local", "check", "rule:shift-z", "--window", "100"]);
    assert_eq!(v["answer"], "no");
}

#[test]
fn witness_commands() {
    let (v, code) = json(&["witness", "commutator", "01101"]);
    assert_eq!((v["matches"].as_bool(), code), (Some(true), 0));
    let (v, _) = json(&["witness", "sfinite", "cycles:(0 1 2)"]);
    assert_eq!(v["class"], "even-finite");
    let (v, _) = json(&["witness", "three-cycle", "cycles:(0 1)", "cycles:(1 2)"]);
    assert!(v["three_cycle"].as_str().unwrap().starts_with("cycles:("));
    let (v, _) = json(&["witness", "p-equiv", "intervals-growing", "intervals-growing", "--depth", "3", "--factor", "cycles:(1 2)"]);
    assert_eq!(v["factorization"]["product_agrees"], true);
    assert_eq!(v["factorization"]["q_certified"], "yes");
    let (v, _) = json(&["witness", "q-equiv", "pairs", "--depth", "3", "--factor", "cycles:(0 1)"]);
    assert!(v["factors"].as_array().unwrap().iter().all(|f| f["certified"] == true));
    assert_eq!(symkit(&["witness", "even-shift", "pairs"]).status.code(), Some(1));
}

#[test]
fn tree_commands() {
    let (v, code) = json(&["tree", "build", "--depth", "3"]);
    assert_eq!(code, 0);
    assert_eq!(v["tree"]["k_sizes"], serde_json::json!([1, 1, 2, 4]));
    let (v, _) = json(&["tree", "branch", "--mode", "binary", "--oracle", "stab:partition:a0", "--depth", "3", "--choice", "1,0,1"]);
    assert_eq!(v["alpha_images"].as_array().unwrap().len(), 3);
    let (v, _) = json(&["tree", "s", "--depth", "3"]);
    assert_eq!(v["level_sizes"], serde_json::json!([1, 1, 3, 11]));
    let (v, _) = json(&["tree", "verify", "--depth", "4", "--pi", "cycles:(0 1)"]);
    assert_eq!(v["passed"], true);
    assert_eq!(symkit(&["tree", "build", "--depth", "13"]).status.code(), Some(1));
}

#[test]
fn predicates() {
    let (v, code) = json(&["discrete", "trivial"]);
    assert_eq!((v["answer"].as_str(), code), (Some("yes"), 0));
    let (v, _) = json(&["compact", "full"]);
    assert_eq!(v["answer"], "no");
}
