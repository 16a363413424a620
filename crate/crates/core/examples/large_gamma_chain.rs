// The ascending chain: a convergent sufficient series next to a divergent
// endpoint condition. Streams at large depth, materializes at small depth.

use twoweight::counterexamples::{endpoint_sup_condition, LargeGammaChain, LargeGammaParams};
use twoweight::suite::large_gamma_checks;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let small = LargeGammaChain::new(LargeGammaParams { p: 2.0, q: 0.5, depth: 12, beta: 1.25 })?;
    let inst = small.instance()?;
    println!("materialized depth 12: {} nodes, endpoint condition {:.4}", inst.tree.node_count(), endpoint_sup_condition(&inst));

    let (checks, report) = large_gamma_checks(100_000)?;
    for c in &checks {
        println!("{}: {:.5} vs {:.5} {}", c.name, c.observed, c.limit, if c.passed { "ok" } else { "FAILED" });
        assert!(c.passed);
    }
    println!("slope {} (expected {})", report["divergent"]["slope"], report["expected_slope"]);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
