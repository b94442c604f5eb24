use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name).to_string_lossy().into_owned()
}

fn svrp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_svrp")).args(args).output().expect("spawn svrp")
}

fn read(path: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).expect("output file")).expect("JSON file")
}

fn ok(out: &Output) {
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

fn json(out: &Output) -> Value {
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

#[test]
fn core_example_solves_to_four() {
    let v = json(&svrp(&["solve", "--instance", &fixture("core_example.svrp.json")]));
    assert_eq!(v["mode"], "explicit");
    assert_eq!(v["objective"], "4");
    assert_eq!(v["lower_bound"], "1.5");
}

#[test]
fn mode_mismatch_is_usage_error() {
    let out = svrp(&["solve", "--instance", &fixture("core_example.svrp.json"), "--mode", "indep"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_or_malformed_input_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.svrp.json");
    std::fs::write(&bad, "{\"points\": [\"r\"]").unwrap();
    assert_eq!(svrp(&["solve", "--instance", bad.to_str().unwrap()]).status.code(), Some(3));
    let missing = dir.path().join("nope.svrp.json");
    assert_eq!(svrp(&["solve", "--instance", missing.to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn solutions_pass_eval() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("rand.svrp.json");
    let inst = inst.to_str().unwrap();
    ok(&svrp(&["gen", "random", "--n", "6", "--m", "3", "--capacity", "2", "--lambda", "3", "--seed", "11", "--out", inst]));
    for mode in ["explicit", "blackbox"] {
        let sol = dir.path().join(format!("{mode}.json"));
        let sol = sol.to_str().unwrap();
        ok(&svrp(&["solve", "--instance", inst, "--mode", mode, "--seed", "3", "--out", sol]));
        let solved = read(sol);
        let checked = json(&svrp(&["eval", "--instance", inst, "--solution", sol]));
        assert_eq!(checked["consistent"], true, "{mode}");
        assert_eq!(checked["objective"], solved["objective"], "{mode}");
    }
}

#[test]
fn eval_of_oracle_solution_returns_oracle_cost() {
    let dir = tempfile::tempdir().unwrap();
    let sol = dir.path().join("opt.json");
    let sol = sol.to_str().unwrap();
    let core = fixture("core_example.svrp.json");
    ok(&svrp(&["oracle", "--instance", &core, "--out", sol]));
    let opt = read(sol);
    let checked = json(&svrp(&["eval", "--instance", &core, "--solution", sol]));
    assert_eq!(checked["objective"], opt["objective"]);
    assert_eq!(checked["objective"], "4");
}

#[test]
fn hardness_from_k2_fixture() {
    let v = json(&svrp(&["gen", "hardness", "--hypergraph", &fixture("k2_example.hg.json")]));
    assert_eq!(v["lambda"], "48");
    assert_eq!(v["capacity"], 1);
    let dist = v["dist"].as_array().unwrap();
    for d in dist[0].as_array().unwrap().iter().skip(1) {
        assert_eq!(d, "1.5");
    }
}

#[test]
fn bench_reports_ratios() {
    let out = svrp(&["bench", "--suite", "random", "--count", "20", "--seed", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    let headers = rdr.headers().unwrap().clone();
    let ratio = headers.iter().position(|h| h == "ratio").unwrap();
    let rows: Vec<_> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 20);
    for r in rows {
        assert!(r[ratio].parse::<f64>().unwrap() >= 1.0 - 1e-9);
    }
    assert!(String::from_utf8_lossy(&out.stderr).contains("random: max ratio"));
}
