// Local γ-means of the localized sums and the generalized Wolff potential.

use twoweight::wolff::{dlbo_ratio, lambda_gamma, lambda_one, wolff_report};
use twoweight::{DyadicTree, Exponents, Instance};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let tree = DyadicTree::new(2, 3)?;
    let lambda: Vec<f64> = (0..tree.node_count()).map(|k| 1.0 / (1.0 + k as f64)).collect();
    let sigma = [1.0, 0.5, 2.0, 1.0, 0.25, 1.0, 1.5, 0.5];
    let omega = [0.5, 1.0, 0.0, 2.0, 1.0, 0.5, 1.0, 1.0];
    let inst = Instance::new(tree, lambda, &sigma, &omega, Exponents::new(2.0, 0.5, 1.0)?)?;

    let mut last = 0.0;
    for g in [-1.0, 0.25, 0.5, 1.0, 2.0, 4.0, f64::INFINITY] {
        let m = lambda_gamma(&inst, 0, g)?;
        println!("Λ_(γ={g}) at the root = {m:.6}");
        assert!(m >= last - 1e-12);
        last = m;
    }
    assert!((lambda_one(&inst)[0] - lambda_gamma(&inst, 0, 1.0)?).abs() < 1e-14);

    for g in [0.5, 1.0, 2.0] {
        let r = wolff_report(&inst, g)?;
        println!("γ = {g}: condition {:.6}, potential on leaves {:?}", r.condition_value, r.potential);
    }
    println!("oscillation ratio {:.3}", dlbo_ratio(&inst));
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
