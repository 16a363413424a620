// The descending chain: the γ-Wolff condition converges for γ < q while the
// necessary condition keeps growing.

use twoweight::counterexamples::{necessary_condition, SmallGammaChain, SmallGammaParams};
use twoweight::suite::small_gamma_checks;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let params = SmallGammaParams { p: 2.0, q: 0.5, gamma: 0.25, depth: 14, epsilon: 0.5, alpha: 1.0 };
    let chain = SmallGammaChain::new(params)?;
    let inst = chain.instance()?;
    println!("depth 14: necessary condition {:.4}", necessary_condition(&inst));

    let (checks, info) = small_gamma_checks(20_000)?;
    for c in &checks {
        println!("{}: {:.5} vs {:.5} {}", c.name, c.observed, c.limit, if c.passed { "ok" } else { "FAILED" });
        assert!(c.passed);
    }
    println!("{}", serde_json::to_string_pretty(&info["wolff_partial"])?);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
