// Running a seeded suite on a worker pool and reading its constants table.

use twoweight::suite::{run_suite, SuiteConfig, SuiteName};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = SuiteConfig::new(SuiteName::Sandwich, 11);
    cfg.count = 4;
    cfg.workers = 2;
    let outcome = run_suite(SuiteName::Sandwich, &cfg)?;
    for (k, v) in &outcome.report.constants {
        println!("{k:>28} {v:.4}");
    }
    assert!(outcome.report.passed);

    cfg.workers = 1;
    assert_eq!(run_suite(SuiteName::Sandwich, &cfg)?.report.hash, outcome.report.hash);
    println!("report hash {}", outcome.report.hash);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
