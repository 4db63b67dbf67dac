mod common;

use std::process::Command;

use serde_json::Value;

fn run(args: &[&str]) -> (i32, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_pureflat"))
        .args(args)
        .output()
        .unwrap();
    let json = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), json)
}

fn fixture(name: &str) -> String {
    common::fixture_path(name).display().to_string()
}

fn order(v: &Value) -> Vec<u64> {
    v["order"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_u64().unwrap())
        .collect()
}

fn kappa(v: &Value) -> Vec<u64> {
    v["kappa"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_u64().unwrap())
        .collect()
}

#[test]
fn classify_rotor5() {
    let (code, r) = run(&["classify", &fixture("rotor5")]);
    assert_eq!(code, 0);
    assert_eq!(r["verdict"], "P2_FLAT");
    assert_eq!(r["theorem"], "3-inputs-5-states case 1");
    assert_eq!(order(&r), [0, 0, 1]);
    let mr = r["analyses"]
        .as_array()
        .unwrap()
        .iter()
        .find(|a| a["criterion"] == "bracket-ranks")
        .unwrap();
    assert_eq!(mr["verdict"], "INCONCLUSIVE");
}

#[test]
fn classify_car_and_failures() {
    let (code, r) = run(&["classify", &fixture("car")]);
    assert_eq!((code, r["theorem"].as_str()), (0, Some("two-inputs")));
    let (code, r) = run(&["classify", &fixture("noninvolutive-fail")]);
    assert_eq!((code, r["verdict"].as_str()), (1, Some("NOT_P2_FLAT")));
    let (code, _) = run(&["classify", &fixture("two-pairs-5")]);
    assert_eq!(code, 2);
}

#[test]
fn search_fixtures() {
    let (code, r) = run(&["search", &fixture("rotor5")]);
    assert_eq!((code, order(&r), kappa(&r)), (0, vec![0, 0, 1], vec![3, 3, 3]));
    let (_, r) = run(&["search", &fixture("car")]);
    assert_eq!(order(&r), [1, 0]);
    let (_, r) = run(&["search", &fixture("chained6"), "--trace"]);
    assert_eq!((order(&r), kappa(&r)), (vec![0, 0, 2], vec![4, 4, 3]));
    let trace = r["search"]["trace"].as_array().unwrap();
    assert_eq!(trace.len() as u64, r["search"]["candidates"].as_u64().unwrap());
    assert!(trace.iter().all(|t| !t["levels"].as_array().unwrap().is_empty()));
    let (code, _) = run(&["search", &fixture("unreachable6")]);
    assert_eq!(code, 1);
    let (code, r) = run(&["search", &fixture("case2-6-counter"), "--max-total", "3"]);
    assert_eq!((code, r["verdict"].as_str()), (2, Some("INCONCLUSIVE")));
}

#[test]
fn verify_candidates() {
    let (code, r) = run(&["verify", &fixture("rotor5")]);
    assert_eq!(code, 0);
    assert_eq!(r["verify"]["parametrization"]["symbolic_passed"], true);
    let (code, r) = run(&["verify", &fixture("rotor5-naive-outputs")]);
    assert_eq!(code, 1);
    let w = &r["verify"]["flat_outputs"]["failure"];
    assert_eq!((w["output"].as_u64(), w["k"].as_u64()), (Some(1), Some(1)));
    assert_eq!(w["pairing"], "1/2");
    let (code, r) = run(&["verify", &fixture("car")]);
    assert_eq!(code, 0);
    assert!(r["verify"]["parametrization"]["numeric"]["sup_error"].as_f64().unwrap() < 1e-6);
    let (code, r) = run(&["verify", &fixture("chained6")]);
    assert_eq!((code, r["error"]["kind"].as_str()), (64, Some("usage")));
}

#[test]
fn indices_report() {
    let (code, r) = run(&["indices", &fixture("chained6")]);
    assert_eq!(code, 0);
    assert_eq!(r["indices"]["linear_system"][0], "y1^(4) = v1");
    assert_eq!(r["indices"]["kappa_sum"], 11);
    let (code, r) = run(&["indices", &fixture("case2-5"), "--order", "0,1,2"]);
    assert_eq!((code, kappa(&r)), (0, vec![4, 4, 3]));
    let (code, _) = run(&["indices", &fixture("case2-5"), "--order", "0,0,1"]);
    assert_eq!(code, 1);
}

#[test]
fn reports_are_deterministic() {
    let strip = |mut v: Value| {
        v.as_object_mut().unwrap().remove("timing_ms");
        v
    };
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let out = out.to_str().unwrap();
    let (_, a) = run(&["search", &fixture("case2-5"), "--seed", "11"]);
    let (code, _) = run(&["search", &fixture("case2-5"), "--seed", "11", "--out", out]);
    assert_eq!(code, 0);
    let b: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(strip(a.clone()), strip(b));
    assert_eq!(a["seed"], 11);
    assert_eq!(a["input"]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn input_errors() {
    let (code, r) = run(&["classify", "/nonexistent.sys"]);
    assert_eq!((code, r["error"]["kind"].as_str()), (66, Some("io")));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.sys");
    std::fs::write(&bad, "states = x1, x2\n[fields]\ng1 = 1, x3\n").unwrap();
    let (code, r) = run(&["classify", bad.to_str().unwrap()]);
    assert_eq!((code, r["error"]["line"].as_u64()), (64, Some(3)));
    let wide = dir.path().join("wide.sys");
    std::fs::write(&wide, "states = x1, x2, x3, x4\n[fields]\ng1 = 1, 0, 0, 0\n").unwrap();
    let (code, _) = run(&["classify", wide.to_str().unwrap()]);
    assert_eq!(code, 64);
    let (code, _) = run(&["frobnicate"]);
    assert_eq!(code, 64);
}
