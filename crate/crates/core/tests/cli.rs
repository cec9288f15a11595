use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_banachkit"));
    c.env_remove("BANACHKIT_CACHE_DIR");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("banachkit-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn norm_sb_over_l1_is_sqrt5_with_partition() {
    let out = run(&["norm", "--space", "sb(lp(1), r=2)", "--vec", "[1,1,1]"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert!((v["value"].as_f64().unwrap() - 5f64.sqrt()).abs() < 1e-12);
    assert_eq!(v["certificate"]["partition"]["sets"], serde_json::json!([[1], [2, 3]]));
}

#[test]
fn norm_l2_of_three_four() {
    let out = run(&["norm", "--space", "lp(2)", "--vec", "[3,4]"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["value"].as_f64(), Some(5.0));
}

#[test]
fn malformed_space_exits_2_with_position() {
    let out = run(&["norm", "--space", "sb(lp(2), r=", "--vec", "[1]"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("position 12"), "{err}");
}

#[test]
fn malformed_vector_exits_2() {
    let out = run(&["norm", "--space", "lp(2)", "--vec", "[1, x]"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oversized_exact_sb_exits_3() {
    let v: Vec<String> = (1..=30).map(|i| format!("{}", 1.0 / i as f64)).collect();
    let out = run(&["norm", "--space", "sb(lp(2), r=2)", "--vec", &format!("[{}]", v.join(","))]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

fn csv_values(out: &Output) -> Vec<f64> {
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("row,shifts,value"));
    lines.map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect()
}

#[test]
fn sm_csv_sb_basis_matches_base_norm() {
    let out = run(&["sm", "--basis", "sb(lp(1), r=2)", "--coeffs", "1,-0.5,0.25", "--spread"]);
    assert_eq!(out.status.code(), Some(0));
    let values = csv_values(&out);
    assert_eq!(values.len(), 4);
    assert!(values.iter().all(|v| (v - 1.75).abs() < 1e-12), "{values:?}");
}

#[test]
fn sm_csv_constant_generator() {
    let gen = r#"{"kind":"constant","x":{"1":3.0,"2":4.0},"space":"lp(2)"}"#;
    let out = run(&["sm", "--generator", gen, "--coeffs", "1,1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(csv_values(&out).iter().all(|v| (v - 10.0).abs() < 1e-12));
}

#[test]
fn sm_csv_singular_shift() {
    let gen = r#"{"kind":"shifted","inner":{"kind":"basis","space":"lp(2)"}}"#;
    let out = run(&["sm", "--generator", gen, "--coeffs", "1,1"]);
    assert!(csv_values(&out).iter().all(|v| (v - 6f64.sqrt()).abs() < 1e-12));
}

#[test]
fn sm_json_output() {
    let out = run(&["--json", "sm", "--basis", "lp(2)", "--coeffs", "3,4"]);
    let v = stdout_json(&out);
    assert_eq!(v["value"].as_f64(), Some(5.0));
    assert_eq!(v["stabilized"], Value::Bool(true));
}

#[test]
fn decompose_recovers_planted_profile() {
    let gen = r#"{"kind":"planted","profile":[0.8,0.6],"small":0.3,"decay":0.5,"block_len":3,"space":"lp(2)"}"#;
    let out = run(&["--json", "decompose", "--generator", gen, "--deltas", "0.5,0.4", "--horizon", "24"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["status"], "recovered");
    assert_eq!(v["profile"]["lambda"], serde_json::json!([0.8, 0.6]));
}

#[test]
fn generator_from_file() {
    let dir = scratch("gen");
    let path = dir.join("gen.json");
    std::fs::write(&path, r#"{"kind":"basis","space":"lp(1)"}"#).unwrap();
    let out = run(&["sm", "--generator", &format!("@{}", path.display()), "--coeffs", "1,2"]);
    assert!(csv_values(&out).iter().all(|v| (v - 3.0).abs() < 1e-12));
}

#[test]
fn chain_descriptors_k1_and_k2() {
    let out = run(&["chain", "--k", "1", "--smoke", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["version"], "chain-v1");
    assert_eq!(v["levels"].as_array().unwrap().len(), 1);
    assert_eq!(v["levels"][0]["r"]["exact"], "3");
    assert_eq!(v["levels"][0]["s"]["exact"], "4/3");
    assert_eq!(v["levels"][0]["t"]["exact"], "5/3");

    let dir = scratch("chain");
    let path = dir.join("chain.json");
    let out = run(&["--out", path.to_str().unwrap(), "chain", "--k", "2", "--smoke", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["levels"][1]["r"]["exact"], "4");
    assert_eq!(v["levels"][1]["s"]["exact"], "10/9");
    assert_eq!(v["levels"][1]["t"]["exact"], "11/9");
    let smoke = v["smoke"]["vectors"].as_array().unwrap();
    assert_eq!(smoke.len(), 3);
    assert!(smoke.iter().all(|r| r["value"].as_f64().unwrap() > 0.0));
}

#[test]
fn chain_invalid_k_is_usage_error() {
    assert_eq!(run(&["chain", "--k", "0"]).status.code(), Some(2));
    assert_eq!(run(&["chain"]).status.code(), Some(2));
}

#[test]
fn check_writes_deterministic_reports() {
    let dir = scratch("check");
    let a = dir.join("a.json");
    let b = dir.join("b.json");
    for path in [&a, &b] {
        let out = run(&["--seed", "9", "--out", path.to_str().unwrap(), "check", "--suite", "sb", "--cases", "10"]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let ra: Value = serde_json::from_str(&std::fs::read_to_string(&a).unwrap()).unwrap();
    let rb: Value = serde_json::from_str(&std::fs::read_to_string(&b).unwrap()).unwrap();
    assert_eq!(ra["schema"], "report-v1");
    assert_eq!(ra["seed"], 9);
    assert_eq!(serde_json::to_string(&ra["cases"]).unwrap(), serde_json::to_string(&rb["cases"]).unwrap());
}

#[test]
fn check_unknown_suite_is_rejected() {
    assert_ne!(run(&["check", "--suite", "nope"]).status.code(), Some(0));
}

#[test]
fn cache_dir_is_populated_and_reused() {
    let dir = scratch("cache");
    let args = ["norm", "--space", "sb(lp(1), r=2)", "--vec", "[1,1,1]"];
    let first = bin().env("BANACHKIT_CACHE_DIR", &dir).args(args).output().unwrap();
    assert_eq!(first.status.code(), Some(0));
    let cache = dir.join("eval-cache.json");
    assert!(cache.exists());
    let second = bin().env("BANACHKIT_CACHE_DIR", &dir).args(args).output().unwrap();
    assert_eq!(stdout_json(&first)["value"], stdout_json(&second)["value"]);
}
