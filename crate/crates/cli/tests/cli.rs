use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;
use tnbe::io::network_to_json;
use tnbe::{Edge, Leg, SiteTensor, TensorNetwork, C64};

fn tnbe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tnbe")).args(args).env_remove("TNBE_DENSE_LIMIT").output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn put(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Two-site identity MPO with a dimension-1 bond.
fn identity_mpo() -> TensorNetwork {
    let mut tn = TensorNetwork::new(2);
    for v in 0..2 {
        tn.vertices.push(SiteTensor::new(v, vec![Leg::bond(0, 1), Leg::phys_out(2), Leg::phys_in(2)], vec![c(1.0), c(0.0), c(0.0), c(1.0)]));
    }
    tn.edges.push(Edge::internal(0, 0, 1, 1));
    tn
}

fn single_site(data: [f64; 4]) -> TensorNetwork {
    let mut tn = TensorNetwork::new(2);
    tn.vertices.push(SiteTensor::new(0, vec![Leg::phys_out(2), Leg::phys_in(2)], data.iter().map(|&x| c(x)).collect()));
    tn
}

/// A two-site chain with a generic bond.
fn chain() -> TensorNetwork {
    let mut tn = TensorNetwork::new(2);
    let vals = |seed: f64| (0..8).map(|i| C64::new((seed + i as f64).sin(), (seed * 2.0 + i as f64).cos())).collect();
    tn.vertices.push(SiteTensor::new(0, vec![Leg::phys_out(2), Leg::phys_in(2), Leg::bond(0, 2)], vals(0.3)));
    tn.vertices.push(SiteTensor::new(1, vec![Leg::bond(0, 2), Leg::phys_out(2), Leg::phys_in(2)], vals(1.7)));
    tn.edges.push(Edge::internal(0, 0, 1, 2));
    tn
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn identity_mpo_compiles_with_unit_gamma() {
    let dir = TempDir::new().unwrap();
    let net = put(&dir, "net.json", &network_to_json(&identity_mpo()));
    let res = dir.path().join("res.json");
    let out = tnbe(&["compile", s(&net), "-o", s(&res)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc = read_json(&res);
    assert_eq!(doc["status"], "encoded");
    assert!((doc["gamma"].as_f64().unwrap() - 1.0).abs() < 1e-14);

    let out = tnbe(&["verify", s(&net), s(&res)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["pass"], true);

    let out = tnbe(&["report", s(&res), "--format", "json"]);
    assert_eq!(code(&out), 0);
    let rep: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rep["flag_count_dedicated"], 0);
    assert!((rep["gamma"].as_f64().unwrap() - 1.0).abs() < 1e-14);
}

#[test]
fn dangling_edge_is_named() {
    let dir = TempDir::new().unwrap();
    let mut tn = single_site([1.0, 0.0, 0.0, 1.0]);
    tn.vertices[0].legs.insert(0, Leg::bond(7, 1));
    let net = put(&dir, "net.json", &network_to_json(&tn));
    let out = tnbe(&["compile", s(&net)]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("edge 7"), "{}", stderr(&out));
}

#[test]
fn malformed_file_reports_location() {
    let dir = TempDir::new().unwrap();
    let net = put(&dir, "net.json", "{\n  \"d\": 2,\n  \"vertices\": 3\n}\n");
    let out = tnbe(&["compile", s(&net)]);
    assert_eq!(code(&out), 1);
    let msg = stderr(&out);
    assert!(msg.contains("vertices") && msg.contains("line 3"), "{msg}");
    assert_eq!(code(&tnbe(&["compile", "/nonexistent/net.json"])), 1);
}

#[test]
fn zero_site_exits_with_two() {
    let dir = TempDir::new().unwrap();
    let mut tn = chain();
    tn.vertices[1].data.iter_mut().for_each(|z| *z = c(0.0));
    let net = put(&dir, "net.json", &network_to_json(&tn));
    let res = dir.path().join("res.json");
    let out = tnbe(&["compile", s(&net), "-o", s(&res)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("zero operator"));
    let doc = read_json(&res);
    assert_eq!(doc["status"], "zero_operator");
    assert_eq!(doc["gamma"].as_f64(), Some(0.0));
    // the zero result does encode the zero network
    assert_eq!(code(&tnbe(&["verify", s(&net), s(&res)])), 0);
    let out = tnbe(&["report", s(&res)]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("zero_operator"));
}

#[test]
fn mismatched_network_fails_verification() {
    let dir = TempDir::new().unwrap();
    let net = put(&dir, "net.json", &network_to_json(&chain()));
    let res = dir.path().join("res.json");
    assert_eq!(code(&tnbe(&["compile", s(&net), "-o", s(&res)])), 0);
    let mut other = chain();
    other.vertices[0].data[0] += c(0.5);
    let other = put(&dir, "other.json", &network_to_json(&other));
    let out = tnbe(&["verify", s(&other), s(&res)]);
    assert_eq!(code(&out), 4);
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["block_error"].as_f64().unwrap() > 1e-3);
    assert_eq!(report["pass"], false);
}

#[test]
fn tolerance_flag_loosens_acceptance() {
    let dir = TempDir::new().unwrap();
    let net = put(&dir, "net.json", &network_to_json(&chain()));
    let res = dir.path().join("res.json");
    assert_eq!(code(&tnbe(&["compile", s(&net), "-o", s(&res)])), 0);
    let mut doc = read_json(&res);
    let x = doc["ops"][0]["re"][0].as_f64().unwrap();
    doc["ops"][0]["re"][0] = Value::from(x + 1e-8);
    let bad = put(&dir, "bad.json", &serde_json::to_string(&doc).unwrap());
    assert_eq!(code(&tnbe(&["verify", s(&net), s(&bad)])), 4);
    assert_eq!(code(&tnbe(&["verify", s(&net), s(&bad), "--tol", "1e-6"])), 0);
}

#[test]
fn dense_limit_exits_with_three() {
    let dir = TempDir::new().unwrap();
    let net = put(&dir, "net.json", &network_to_json(&chain()));
    let res = dir.path().join("res.json");
    assert_eq!(code(&tnbe(&["compile", s(&net), "-o", s(&res)])), 0);
    let out = tnbe(&["verify", s(&net), s(&res), "--dense-limit", "2"]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("dense limit"));
    let out = Command::new(env!("CARGO_BIN_EXE_tnbe"))
        .args(["verify", s(&net), s(&res)])
        .env("TNBE_DENSE_LIMIT", "2")
        .output()
        .unwrap();
    assert_eq!(code(&out), 3);
}

#[test]
fn qubo_methods() {
    let dir = TempDir::new().unwrap();
    let pair = put(&dir, "pair.json", r#"{"n": 2, "c_const": 0.0, "linear": [0.5, 0.0], "quadratic": [{"i": 0, "j": 1, "alpha": 1.0}]}"#);
    let net = dir.path().join("net.json");
    let out = tnbe(&["qubo", s(&pair), "--method", "sweep", "-o", s(&net)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stderr(&out).contains("s = 1"));
    let doc = read_json(&net);
    let internal: Vec<&Value> = doc["edges"].as_array().unwrap().iter().filter(|e| !e["v"].is_null()).collect();
    assert_eq!(internal.len(), 1);
    assert_eq!(internal[0]["dim"], 3);
    assert_eq!(code(&tnbe(&["compile", s(&net)])), 0);

    let empty = put(&dir, "empty.json", r#"{"n": 2}"#);
    let out = tnbe(&["qubo", s(&empty), "--method", "sum"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("empty operator"));

    let triangle = put(
        &dir,
        "tri.json",
        r#"{"n": 3, "quadratic": [{"i": 0, "j": 1, "alpha": 1.0}, {"i": 1, "j": 2, "alpha": 1.0}, {"i": 0, "j": 2, "alpha": 1.0}]}"#,
    );
    let out = tnbe(&["qubo", s(&triangle), "--method", "graph", "-o", s(&net)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(read_json(&net)["vertices"].as_array().unwrap().len(), 3);
    let out = tnbe(&["qubo", s(&triangle), "--method", "graph", "--dense-limit", "4"]);
    assert_eq!(code(&out), 3);
    assert_eq!(code(&tnbe(&["qubo", s(&triangle), "--order", "min_degree"])), 0);
}

#[test]
fn report_counts_angles_and_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let net = put(&dir, "net.json", &network_to_json(&single_site([1.0, 0.0, 0.0, 0.5])));
    let res = dir.path().join("res.json");
    assert_eq!(code(&tnbe(&["compile", s(&net), "-o", s(&res)])), 0);
    let a = tnbe(&["report", s(&res), "--format", "json"]);
    let b = tnbe(&["report", s(&res), "--format", "json"]);
    assert_eq!(a.stdout, b.stdout);
    let rep: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(rep["distinct_angles_total"], 2);
    assert_eq!(rep["flag_count_dedicated"], 1);
    assert_eq!(rep["flag_count_sequential"], 1);
    let text = tnbe(&["report", s(&res)]);
    assert!(String::from_utf8_lossy(&text.stdout).contains("distinct angles"));
}

#[test]
fn compile_is_byte_deterministic() {
    let dir = TempDir::new().unwrap();
    let net = put(&dir, "net.json", &network_to_json(&chain()));
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    assert_eq!(code(&tnbe(&["compile", s(&net), "-o", s(&a), "--pad", "symmetry"])), 0);
    assert_eq!(code(&tnbe(&["compile", s(&net), "-o", s(&b), "--pad", "symmetry"])), 0);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(code(&tnbe(&["compile", s(&net), "--order", "1,0"])), 0);
    assert_eq!(code(&tnbe(&["compile", s(&net), "--order", "1,1"])), 1);
}
