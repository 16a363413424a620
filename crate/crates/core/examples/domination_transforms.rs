// Passing between sup-type and sum-type coefficient families, and the
// multiplier conditions built on them.

use twoweight::operator::{
    dual_multiplier_check, multiplier_norm_sup, multiplier_ratio, stein_necessity_check, sum_side, sup_side,
    transform_a_to_b, transform_b_to_a, NormOptions,
};
use twoweight::{DyadicTree, Exponents, Instance};

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let tree = DyadicTree::new(2, 2)?;
    let lambda = vec![1.0, 0.5, 2.0, 0.25, 1.5, 0.75, 1.0];
    let inst = Instance::new(tree, lambda, &[1.0, 2.0, 0.5, 1.0], &[0.5, 1.0, 1.0, 2.0], Exponents::default())?;

    let b = vec![0.3, 1.0, 0.2, 0.5, 0.1, 0.4, 0.6];
    let a = transform_b_to_a(&inst, &b);
    let (la, sup_a) = sup_side(&inst, &a);
    let (rb, sum_b) = sum_side(&inst, &b);
    assert!(max_diff(&la, &rb) < 1e-12 && max_diff(&sup_a, &sum_b) < 1e-12);

    let a = vec![2.0, 1.0, 3.0, 0.5, 4.0, 1.0, 2.0];
    let b = transform_a_to_b(&inst, &a);
    let (la, sup_a) = sup_side(&inst, &a);
    let (rb, sum_b) = sum_side(&inst, &b);
    assert!(max_diff(&sup_a, &sum_b) < 1e-12);
    assert!(la.iter().zip(&rb).all(|(l, r)| *l <= r * (1.0 + 1e-12)));
    println!("a = {a:?} -> b = {b:?}");

    let sup = multiplier_norm_sup(&inst, NormOptions::default())?;
    println!("sup over families of the multiplier ratio ≈ {:.6}", sup.value);
    assert!(multiplier_ratio(&inst, &a) <= sup.value * (1.0 + 1e-6));

    let dual = dual_multiplier_check(&inst, &b)?;
    println!("dual multiplier: {:.4} vs {:.4}", dual.lhs, dual.rhs);
    let stein = stein_necessity_check(&inst, 0.25, &a)?;
    println!("γ-localized multiplier: {:.4} vs {:.4}", stein.lhs, stein.rhs);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
