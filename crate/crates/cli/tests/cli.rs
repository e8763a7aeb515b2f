use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name).to_string_lossy().into_owned()
}

fn mhkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mhkit")).args(args).output().expect("spawn mhkit")
}

fn json_ok(args: &[&str]) -> Value {
    let out = mhkit(args);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json output")
}

fn close(v: &Value, want: f64) -> bool {
    v.as_f64().is_some_and(|x| (x - want).abs() < 1e-9)
}

#[test]
fn account_reports_bell_circuit() {
    let v = json_ok(&["account", "--circuit", &data("bell.mhq")]);
    assert_eq!(v["depth"], 2);
    assert_eq!(v["mh_level"], 0);
    assert_eq!(v["t_count"], 0);
    let v = json_ok(&["account", "--circuit", &data("clifford_t.mhq"), "--check"]);
    assert!(v["report"]["t_count"].as_u64().unwrap() > 0);
    assert_eq!(v["violations"], Value::Array(vec![]));
}

#[test]
fn certify_cat_gluing_example() {
    let v = json_ok(&["certify", "--kind", "cat_gluing", "--alpha", "0.1", "--beta", "0.9", "--eps", "0.01", "--n", "1024"]);
    assert_eq!(v["kind"], "cat_gluing");
    assert!(close(&v["derived"]["log_n_term"], 4.5));
    assert!(v["bound"].as_f64().unwrap() > 0.0);
    let v = json_ok(&["certify", "--kind", "cat_gluing", "--alpha", "0.5", "--beta", "0.031", "--eps", "1e-4", "--n", "1024"]);
    assert!(v["bound"].as_f64().unwrap() > 0.0);
    assert!(close(&v["inputs"]["eps"], 1e-4));
}

#[test]
fn usage_and_input_errors_exit_two() {
    assert_eq!(mhkit(&["account", "--bogus"]).status.code(), Some(2));
    assert_eq!(mhkit(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(mhkit(&["account", "--circuit", "/nonexistent/x.mhq"]).status.code(), Some(2));
    let out = mhkit(&["certify", "--kind", "cat_gluing", "--alpha", "0.1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn feasibility_caps_exit_three() {
    let out = mhkit(&["codes", "--action", "history", "--n", "12"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn suite_is_deterministic_under_seed() {
    let args = ["suite", "--name", "integrality", "--trials", "20", "--seed", "7"];
    let a = mhkit(&args);
    let b = Command::new(env!("CARGO_BIN_EXE_mhkit")).args(args).env("MHKIT_THREADS", "1").output().unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["checked"], 20);
    assert_eq!(mhkit(&["suite", "--name", "nope"]).status.code(), Some(2));
}

#[test]
fn compiled_gadget_round_trips_through_account() {
    let dir = std::env::temp_dir().join(format!("mhkit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("exact.mhq");
    let v = json_ok(&["compile", "--mode", "exact", "--m", "3", "--param", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(v["accounting"]["mh_level"], 2);
    let r = json_ok(&["account", "--circuit", out.to_str().unwrap()]);
    assert_eq!(r, v["accounting"]);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn mi_sweep_as_csv() {
    let out = mhkit(&["mi", "--family", "biased_cat", "--n", "4", "--gamma", "0,0.5", "--a", "0", "--b", "1-2", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    let header: Vec<&str> = lines[0].split(',').collect();
    let col = header.iter().position(|h| *h == "value").unwrap();
    let value = |l: &str| l.split(',').nth(col).unwrap().parse::<f64>().unwrap();
    assert!(value(lines[1]).abs() < 1e-9);
    assert!((value(lines[2]) - 1.0).abs() < 1e-9);
}

#[test]
fn mi_of_stabilizer_state() {
    let v = json_ok(&["mi", "--stabilizers", "XX,ZZ", "--a", "0", "--b", "1"]);
    assert!(close(&v["value"], 2.0));
}

#[test]
fn sim_backends_agree_on_bell() {
    let t = json_ok(&["sim", "--circuit", &data("bell.mhq"), "--backend", "tableau", "--pauli", "ZZ"]);
    let d = json_ok(&["sim", "--circuit", &data("bell.mhq"), "--backend", "dense", "--pauli", "ZZ"]);
    assert!(close(&t["expectation"], 1.0));
    assert!(close(&d["expectation"], 1.0));
    let e = json_ok(&["sim", "--circuit", &data("bell.mhq"), "--qnc0", &data("bell.mhq"), "--region", "0", "--observable", "Z"]);
    assert!(close(&e["value"], 0.0));
}

#[test]
fn lightcone_of_ghz_fanout() {
    let v = json_ok(&["lightcone", "--circuit", &data("ghz4.mhq"), "--region", "0", "--pair", "forward_of_back"]);
    assert_eq!(v["blowup"], 4);
    assert_eq!(v["forward"], serde_json::json!([0, 1, 2, 3]));
    assert_eq!(v["pair"], Value::Null);
}

#[test]
fn tc0_spec_compiles() {
    let v = json_ok(&["compile", "--mode", "tc0", "--spec", &data("maj_and.tc0")]);
    assert_eq!(v["accounting"]["mh_level"], 4);
    let out = mhkit(&["compile", "--mode", "tc0", "--spec", &data("maj_and.tc0"), "--format", "text"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().contains("accounting.mh_level: 4"));
}

#[test]
fn codes_distance_and_groundspace() {
    let v = json_ok(&["codes", "--action", "distance", "--code", "422"]);
    assert_eq!(v["distance"], 2);
    assert_eq!(v["dim"], 4);
    let g = json_ok(&["codes", "--action", "groundspace", "--hamiltonian", &data("parity.ham")]);
    assert_eq!(g["groundspace"]["code"]["dim"], 2);
    assert!(close(&g["groundspace"]["gap"], 1.0));
}

#[test]
fn output_flag_writes_file() {
    let path = std::env::temp_dir().join(format!("mhkit-out-{}.json", std::process::id()));
    let out = mhkit(&["account", "--circuit", &data("bell.mhq"), "--output", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["depth"], 2);
    std::fs::remove_file(&path).ok();
}
