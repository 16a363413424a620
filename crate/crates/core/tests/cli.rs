use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_twoweight"))
}

fn scratch_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("twoweight-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(dir: &PathBuf, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn json_out(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

const MINIMAL: &str = r#"{"branching":2,"depth":0,"lambda":{"":1},"sigma_leaves":[1],"omega_leaves":[1],"exponents":{"p":2,"q":0.5,"gamma":1}}"#;

#[test]
fn minimal_norm_prints_one() {
    let dir = scratch_dir("norm");
    let f = write(&dir, "min.json", MINIMAL);
    let o = bin().args(["norm", "--value-only"]).arg(&f).output().unwrap();
    assert!(o.status.success());
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim().parse::<f64>().unwrap(), 1.0);
    let o = bin().arg("norm").arg(&f).output().unwrap();
    let v = json_out(&o);
    assert_eq!(v["results"]["norm"], 1.0);
    assert_eq!(v["instance_digest"].as_str().unwrap().len(), 64);
}

#[test]
fn reports_hash_identically_across_runs() {
    let dir = scratch_dir("hash");
    let f = write(
        &dir,
        "i.json",
        r#"{"format":1,"branching":2,"depth":2,"lambda":{"":1,"0":0.5,"11":2},"sigma_leaves":[1,2,0.5,1],"omega_leaves":[0.3,1,2,0.1],"exponents":{"p":1.5,"q":0.25}}"#,
    );
    for cmd in [&["norm"][..], &["characterize"], &["wolff", "--gamma", "0.5"], &["lp-norm", "--r", "2", "--s", "1"]] {
        let a = json_out(&bin().args(cmd).arg(&f).output().unwrap());
        let b = json_out(&bin().args(cmd).arg(&f).output().unwrap());
        assert_eq!(a["hash"], b["hash"], "{cmd:?}");
        assert_eq!(a["results"], b["results"]);
    }
}

#[test]
fn usage_errors_exit_two() {
    let dir = scratch_dir("usage");
    let bad = write(&dir, "bad.json", r#"{"branching":2,"depth":1,"sigma_leaves":[1],"omega_leaves":[1,1]}"#);
    let o = bin().arg("norm").arg(&bad).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/sigma_leaves"));
    assert_eq!(bin().arg("frobnicate").output().unwrap().status.code(), Some(2));
    assert_eq!(bin().args(["verify", "nothing"]).output().unwrap().status.code(), Some(2));
    let o = bin().args(["counterexample", "--which", "small-gamma", "--gamma", "0.75"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn empty_collection_gives_zeros() {
    let dir = scratch_dir("empty");
    let f = write(&dir, "e.json", r#"{"branching":2,"depth":1,"sigma_leaves":[1,1],"omega_leaves":[1,1]}"#);
    let v = json_out(&bin().arg("norm").arg(&f).output().unwrap());
    assert_eq!(v["results"]["norm"], 0.0);
    let v = json_out(&bin().arg("characterize").arg(&f).output().unwrap());
    assert_eq!(v["results"]["factorization_bound"], 0.0);
}

#[test]
fn verify_passes_and_persists_constants() {
    let dir = scratch_dir("verify");
    let report = dir.join("report.json");
    let o = bin()
        .env("TWOWEIGHT_WORKERS", "2")
        .args(["verify", "invariants", "--count", "24", "--seed", "3", "--report"])
        .arg(&report)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["passed"], true);
    assert!(v["constants"]["maurey/q=0.5"].as_f64().unwrap() >= 1.0);
}

#[test]
fn counterexample_materializes_small_chains() {
    let dir = scratch_dir("chain");
    let out = dir.join("chain.json");
    let o = bin().args(["counterexample", "--which", "large-gamma", "--depth", "8", "--instance-out"]).arg(&out).output().unwrap();
    assert!(o.status.success());
    let inst = twoweight::io::load_instance(&out).unwrap();
    assert_eq!(inst.tree.depth(), 8);
    let v = json_out(&bin().args(["counterexample", "--which", "large-gamma", "--depth", "100000"]).output().unwrap());
    assert_eq!(v["results"]["instance"], "streaming");
}

#[test]
fn explain_describes_without_running() {
    let o = bin().args(["--explain", "norm", "/does/not/exist.json"]).output().unwrap();
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("L^q(ω)"));
}
