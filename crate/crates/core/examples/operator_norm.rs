// The operator norm of `T_λ(·σ): L^p(σ) → L^q(ω)` with a duality certificate.

use twoweight::operator::{apply_t, estimate_norm, maximal_function, norm_ratio, NormOptions};
use twoweight::{DyadicTree, Exponents, Instance};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let one = Instance::new(DyadicTree::new(2, 0)?, vec![1.0], &[1.0], &[1.0], Exponents::default())?;
    assert!((estimate_norm(&one, NormOptions::default())?.value - 1.0).abs() < 1e-12);

    let tree = DyadicTree::new(2, 2)?;
    let lambda = vec![1.0, 0.5, 0.0, 2.0, 0.25, 0.0, 1.0];
    let inst = Instance::new(tree, lambda, &[1.0, 0.5, 2.0, 1.0], &[0.2, 1.0, 0.0, 3.0], Exponents::new(1.5, 0.5, 1.0)?)?;
    let est = estimate_norm(&inst, NormOptions::default())?;
    println!(
        "norm ≈ {:.8}, certified ≤ {:.8}, duality gap {:.1e}, converged {}",
        est.value, est.certified_upper, est.stationarity_residual, est.converged
    );
    assert!(est.value <= est.certified_upper);
    assert!((norm_ratio(&inst, &est.maximizer) - est.value).abs() <= 1e-9 * est.value);

    let f = vec![1.0, 0.0, 2.0, 1.0];
    println!("T f = {:?}", apply_t(&inst, &f));
    println!("M^σ f = {:?}", maximal_function(&inst, &f));
    assert!(norm_ratio(&inst, &f) <= est.certified_upper);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
