// Mixed sequence norms `f^{r,s}(μ)`, their duality, factorization and the
// comparability of summation-by-parts expressions.

use twoweight::lp::{
    equivalent_expressions_ratio, f_factorize, f_norm, f_norm_dual, f_norm_scaling_check, summation_by_parts_ratio, FNorm,
};
use twoweight::{DyadicTree, Exponents, Instance, Side};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let tree = DyadicTree::new(2, 2)?;
    let lambda = vec![1.0, 0.5, 2.0, 0.25, 1.5, 0.75, 1.0];
    let inst = Instance::new(tree, lambda.clone(), &[1.0, 2.0, 0.5, 1.0], &[0.5, 1.0, 1.0, 2.0], Exponents::default())?;

    for (r, s) in [(2.0, 2.0), (2.0, 1.0), (f64::INFINITY, 1.0), (1.5, f64::INFINITY)] {
        let v = f_norm(&inst, &lambda, FNorm::new(r, s, Side::Sigma)?);
        println!("‖λ‖_f^({r},{s})(σ) = {v:.6}");
    }

    let check = f_norm_scaling_check(&inst, &lambda, 2.0, 1.5, 0.5, Side::Omega)?;
    assert!((check - 1.0).abs() < 1e-12);

    let primal = f_norm(&inst, &lambda, FNorm::new(2.0, 2.0, Side::Sigma)?);
    let dual = f_norm_dual(&inst, &lambda, 2.0, 2.0, Side::Sigma, 1)?;
    println!("primal {primal:.6}, dual estimate {:.6}", dual.value);
    assert!((dual.value - primal).abs() <= 1e-3 * primal);

    let fac = f_factorize(&inst, &lambda, (1.0, 1.5), (1.5, 1.5), (3.0, f64::INFINITY), Side::Sigma)?;
    println!("factorization constant {:.3} (refined: {})", fac.constant, fac.refined);
    for k in inst.active_collection() {
        assert!((fac.a[k] * fac.b[k] - lambda[k]).abs() <= 1e-12 * lambda[k]);
    }

    let (lo, hi) = summation_by_parts_ratio(&inst, &lambda, 2.0, Side::Omega)?;
    let (elo, ehi) = equivalent_expressions_ratio(&inst, &lambda, 2.0, Side::Omega)?;
    println!("summation by parts in [{lo:.3}, {hi:.3}], equivalent expressions in [{elo:.3}, {ehi:.3}]");
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
