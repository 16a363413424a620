//! Instance files, run reports and their digests.
//!
//! Instance layout (`format` 1):
//!
//! ```json
//! {"format": 1, "branching": 2, "depth": 1,
//!  "lambda": {"": 1.0, "0": 0.5},
//!  "sigma_leaves": [1.0, 1.0], "omega_leaves": [1.0, 2.0],
//!  "exponents": {"p": 2.0, "q": 0.5, "gamma": 1.0}}
//! ```
//!
//! Paths use digits `0-9a-z`, root is `""`. Missing paths mean `λ = 0`.
//! `gamma` may be the strings `"inf"` / `"-inf"`. A missing `format` is read
//! as 1; saving always writes it.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::tree::{DyadicTree, Exponents, Instance};

pub const FORMAT: u64 = 1;

fn schema<T>(pointer: &str, message: impl Into<String>) -> Result<T> {
    Err(Error::Schema { pointer: pointer.to_string(), message: message.into() })
}

fn escape(token: &str) -> String {
    token.replace('~', "~0").replace('/', "~1")
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, ptr: &str) -> Result<&'a Value> {
    match obj.get(key) {
        Some(v) => Ok(v),
        None => schema(ptr, format!("missing key {key:?}")),
    }
}

fn as_usize(v: &Value, ptr: &str) -> Result<usize> {
    match v.as_u64() {
        Some(n) => Ok(n as usize),
        None => schema(ptr, "expected a nonnegative integer"),
    }
}

fn as_number(v: &Value, ptr: &str) -> Result<f64> {
    match v {
        Value::Number(n) => Ok(n.as_f64().unwrap_or(f64::NAN)),
        Value::String(s) if s == "inf" => Ok(f64::INFINITY),
        Value::String(s) if s == "-inf" => Ok(f64::NEG_INFINITY),
        _ => schema(ptr, "expected a number"),
    }
}

fn as_mass(v: &Value, ptr: &str) -> Result<f64> {
    let x = as_number(v, ptr)?;
    if !(x.is_finite() && x >= 0.0) {
        return schema(ptr, format!("expected a finite nonnegative mass, got {x}"));
    }
    Ok(x)
}

fn masses(obj: &Map<String, Value>, key: &str, len: usize) -> Result<Vec<f64>> {
    let ptr = format!("/{key}");
    let Value::Array(items) = field(obj, key, "")? else {
        return schema(&ptr, "expected an array");
    };
    if items.len() != len {
        return schema(&ptr, format!("expected {len} leaf masses, got {}", items.len()));
    }
    items.iter().enumerate().map(|(i, v)| as_mass(v, &format!("{ptr}/{i}"))).collect()
}

/// Parse an instance from a JSON value, reporting violations by JSON pointer.
pub fn instance_from_value(v: &Value) -> Result<Instance> {
    let Value::Object(obj) = v else {
        return schema("", "expected an object");
    };
    match obj.get("format") {
        Some(f) if f.as_u64() == Some(FORMAT) => {}
        None => {}
        Some(_) => return schema("/format", format!("unsupported format, expected {FORMAT}")),
    }
    let branching = as_usize(field(obj, "branching", "")?, "/branching")?;
    let depth = as_usize(field(obj, "depth", "")?, "/depth")?;
    if branching < 2 {
        return schema("/branching", "branching must be at least 2");
    }
    let tree = DyadicTree::new(branching, depth)?;
    let mut lambda = vec![0.0; tree.node_count()];
    match obj.get("lambda") {
        None => {}
        Some(Value::Object(m)) => {
            for (path, val) in m {
                let ptr = format!("/lambda/{}", escape(path));
                let node = tree.node_from_path(path).or_else(|e| schema(&ptr, e.to_string()))?;
                lambda[node] = as_mass(val, &ptr)?;
            }
        }
        Some(_) => return schema("/lambda", "expected an object keyed by path"),
    }
    let sigma = masses(obj, "sigma_leaves", tree.leaf_count())?;
    let omega = masses(obj, "omega_leaves", tree.leaf_count())?;
    let exponents = match obj.get("exponents") {
        None => Exponents::default(),
        Some(Value::Object(e)) => {
            let p = as_number(field(e, "p", "/exponents")?, "/exponents/p")?;
            let q = as_number(field(e, "q", "/exponents")?, "/exponents/q")?;
            let gamma = match e.get("gamma") {
                Some(g) => as_number(g, "/exponents/gamma")?,
                None => 1.0,
            };
            let ex = Exponents { p, q, gamma };
            ex.validate().or_else(|err| schema("/exponents", err.to_string()))?;
            ex
        }
        Some(_) => return schema("/exponents", "expected an object"),
    };
    Instance::new(tree, lambda, &sigma, &omega, exponents)
}

pub fn number(x: f64) -> Value {
    if x == f64::INFINITY {
        Value::from("inf")
    } else if x == f64::NEG_INFINITY {
        Value::from("-inf")
    } else {
        json!(x)
    }
}

/// Canonical JSON form; only nonzero λ entries are written.
pub fn instance_to_value(inst: &Instance) -> Value {
    let t = &inst.tree;
    let lambda: BTreeMap<String, Value> = inst
        .lambda()
        .iter()
        .enumerate()
        .filter(|(_, &l)| l != 0.0)
        .map(|(i, &l)| (t.path(i), json!(l)))
        .collect();
    let e = inst.exponents;
    json!({
        "format": FORMAT,
        "branching": t.branching(),
        "depth": t.depth(),
        "lambda": lambda,
        "sigma_leaves": inst.sigma_leaves(),
        "omega_leaves": inst.omega_leaves(),
        "exponents": {"p": e.p, "q": e.q, "gamma": number(e.gamma)},
    })
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    instance_from_value(&serde_json::from_str(text)?)
}

pub fn instance_to_string(inst: &Instance) -> String {
    let mut s = serde_json::to_string_pretty(&instance_to_value(inst)).expect("serializable");
    s.push('\n');
    s
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance> {
    parse_instance(&std::fs::read_to_string(path)?)
}

pub fn save_instance(inst: &Instance, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, instance_to_string(inst))?;
    Ok(())
}

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Content hash of the canonical serialization.
pub fn instance_digest(inst: &Instance) -> String {
    sha256_hex(instance_to_value(inst).to_string().as_bytes())
}

/// What a CLI run or suite produced. `hash` covers everything except
/// `wall_time_s`.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: Vec<String>,
    pub instance_digest: Option<String>,
    pub results: Value,
    pub constants: BTreeMap<String, f64>,
    pub passed: bool,
    pub wall_time_s: f64,
    pub hash: String,
}

impl RunReport {
    pub fn new(command: Vec<String>, instance_digest: Option<String>, results: Value) -> Self {
        let mut r = Self {
            command,
            instance_digest,
            results,
            constants: BTreeMap::new(),
            passed: true,
            wall_time_s: 0.0,
            hash: String::new(),
        };
        r.rehash();
        r
    }

    pub fn rehash(&mut self) {
        let mut v = serde_json::to_value(&*self).expect("serializable");
        let obj = v.as_object_mut().expect("object");
        obj.remove("wall_time_s");
        obj.remove("hash");
        self.hash = sha256_hex(v.to_string().as_bytes());
    }

    pub fn to_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"branching":2,"depth":0,"lambda":{"":1},
        "sigma_leaves":[1],"omega_leaves":[1],"exponents":{"p":2,"q":0.5,"gamma":1}}"#;

    fn pointer(text: &str) -> String {
        match parse_instance(text) {
            Err(Error::Schema { pointer, .. }) => pointer,
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_loads() {
        let i = parse_instance(MINIMAL).unwrap();
        assert_eq!(i.lambda(), &[1.0]);
        assert_eq!(i.active_count(), 1);
    }

    #[test]
    fn missing_lambda_is_zero() {
        let i = parse_instance(r#"{"format":1,"branching":2,"depth":1,"sigma_leaves":[1,1],"omega_leaves":[1,1]}"#)
            .unwrap();
        assert_eq!(i.active_count(), 0);
        assert!(i.lambda().iter().all(|&l| l == 0.0));
    }

    #[test]
    fn schema_pointers() {
        assert_eq!(pointer(r#"{"format":1,"branching":2,"depth":1,"sigma_leaves":[1],"omega_leaves":[1,1]}"#), "/sigma_leaves");
        assert_eq!(
            pointer(r#"{"format":1,"branching":2,"depth":1,"sigma_leaves":[1,-2],"omega_leaves":[1,1]}"#),
            "/sigma_leaves/1"
        );
        assert_eq!(
            pointer(r#"{"format":1,"branching":2,"depth":1,"lambda":{"2":1},"sigma_leaves":[1,1],"omega_leaves":[1,1]}"#),
            "/lambda/2"
        );
        assert_eq!(pointer(r#"{"format":2}"#), "/format");
        assert_eq!(
            pointer(r#"{"format":1,"branching":2,"depth":0,"sigma_leaves":[1],"omega_leaves":[1],"exponents":{"p":2,"q":1.5}}"#),
            "/exponents"
        );
    }

    #[test]
    fn canonical_round_trip() {
        let text = r#"{"omega_leaves":[0.25,3,1e-3,2],"format":1,"depth":2,"branching":2,
            "lambda":{"01":0.5,"":1,"1":2},"sigma_leaves":[1,2,3,4],
            "exponents":{"gamma":"-inf","q":0.25,"p":1.5}}"#;
        let a = instance_to_string(&parse_instance(text).unwrap());
        let b = instance_to_string(&parse_instance(&a).unwrap());
        assert_eq!(a, b);
        assert!(a.contains("\"-inf\""));
        let i = parse_instance(&a).unwrap();
        assert_eq!(i.exponents.gamma, f64::NEG_INFINITY);
        assert_eq!(i.lambda()[i.tree.node_from_path("01").unwrap()], 0.5);
    }

    #[test]
    fn digest_and_report_hash() {
        let i = parse_instance(MINIMAL).unwrap();
        assert_eq!(instance_digest(&i), instance_digest(&i.clone()));
        let mut r = RunReport::new(vec!["norm".into()], Some(instance_digest(&i)), json!({"norm": 1.0}));
        let h = r.hash.clone();
        r.wall_time_s = 3.5;
        r.rehash();
        assert_eq!(r.hash, h);
        r.results = json!({"norm": 1.0000000000000002});
        r.rehash();
        assert_ne!(r.hash, h);
    }
}
