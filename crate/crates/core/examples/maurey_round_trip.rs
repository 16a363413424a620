// Discretizing a density into an auxiliary family and back.

use twoweight::characterize::{density_mass, maurey_discretize, maurey_undiscretize, quantities_a};
use twoweight::{DyadicTree, Exponents, Instance, Side};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let tree = DyadicTree::new(2, 3)?;
    let lambda = vec![1.0; tree.node_count()];
    let sigma = [1.0; 8];
    let omega = [0.5, 1.0, 0.25, 2.0, 1.0, 0.5, 1.0, 1.5];
    let inst = Instance::new(tree, lambda, &sigma, &omega, Exponents::new(2.0, 0.5, 1.0)?)?;

    let phi = [1.0, 3.0, 0.5, 2.0, 1.0, 4.0, 0.25, 1.0];
    let a = maurey_discretize(&inst, &phi)?;
    let phi2 = maurey_undiscretize(&inst, &a)?;
    let before = inst.integrate(&phi, Side::Omega);
    let after = inst.integrate(&phi2, Side::Omega);
    println!("∫Φ dω = {before:.4}, ∫Φ′ dω = {after:.4}, ratio {:.4}", after / before);

    let (_, a2) = quantities_a(&inst, &a)?;
    let q = inst.exponents.q;
    assert!((a2.powf(q / (1.0 - q)) - after).abs() <= 1e-12 * after);
    assert!((density_mass(&inst, &a) - after).abs() <= 1e-12 * after);

    let mut holes = phi;
    holes[2] = 0.0;
    assert!(maurey_discretize(&inst, &holes).is_err());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
