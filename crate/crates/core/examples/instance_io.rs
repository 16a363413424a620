// Instance files: parsing with pointer-located errors, canonical saving and digests.

use twoweight::io::{instance_digest, instance_to_string, parse_instance, RunReport};
use twoweight::Error;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let text = r#"{"format": 1, "branching": 2, "depth": 1,
        "lambda": {"": 1.0, "1": 0.5},
        "sigma_leaves": [1.0, 2.0], "omega_leaves": [0.5, 0.5],
        "exponents": {"p": 2, "q": 0.5, "gamma": "inf"}}"#;
    let inst = parse_instance(text)?;
    assert_eq!(inst.exponents.gamma, f64::INFINITY);
    let canonical = instance_to_string(&inst);
    assert_eq!(instance_to_string(&parse_instance(&canonical)?), canonical);
    println!("{canonical}");
    println!("digest {}", instance_digest(&inst));

    let bad = r#"{"branching": 2, "depth": 1, "sigma_leaves": [1, -1], "omega_leaves": [1, 1]}"#;
    match parse_instance(bad) {
        Err(Error::Schema { pointer, message }) => {
            println!("rejected at {pointer}: {message}");
            assert_eq!(pointer, "/sigma_leaves/1");
        }
        other => panic!("expected a schema error, got {other:?}"),
    }

    let report = RunReport::new(vec!["example".into()], Some(instance_digest(&inst)), serde_json::json!({"ok": true}));
    println!("report hash {}", report.hash);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
