//! Seeded random instances for property suites.

use rand::Rng;

use crate::error::Result;
use crate::tree::{DyadicTree, Exponents, Instance};

#[derive(Debug, Clone, Copy)]
pub struct RandomShape {
    pub branching: usize,
    pub depth: usize,
    /// Probability that a coefficient is zero.
    pub lambda_zero: f64,
    /// Probability that a leaf mass is zero.
    pub mass_zero: f64,
}

impl Default for RandomShape {
    fn default() -> Self {
        Self { branching: 2, depth: 2, lambda_zero: 0.2, mass_zero: 0.1 }
    }
}

fn draw(rng: &mut impl Rng, zero: f64) -> f64 {
    if rng.gen_bool(zero) {
        0.0
    } else {
        rng.gen_range(0.05..2.0)
    }
}

/// Random coefficients and leaf masses on a full tree; the root always
/// carries a positive coefficient and both measures are nonzero.
pub fn random_instance(rng: &mut impl Rng, shape: RandomShape, exponents: Exponents) -> Result<Instance> {
    let tree = DyadicTree::new(shape.branching, shape.depth)?;
    let mut lambda: Vec<f64> = (0..tree.node_count()).map(|_| draw(rng, shape.lambda_zero)).collect();
    lambda[0] = rng.gen_range(0.05..2.0);
    let l = tree.leaf_count();
    let mut sigma: Vec<f64> = (0..l).map(|_| draw(rng, shape.mass_zero)).collect();
    let mut omega: Vec<f64> = (0..l).map(|_| draw(rng, shape.mass_zero)).collect();
    if sigma.iter().all(|&x| x == 0.0) {
        sigma[0] = 1.0;
    }
    if omega.iter().all(|&x| x == 0.0) {
        omega[l - 1] = 1.0;
    }
    Instance::new(tree, lambda, &sigma, &omega, exponents)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn seeded_instances_repeat() {
        let e = Exponents::default();
        let a = random_instance(&mut ChaCha8Rng::seed_from_u64(3), RandomShape::default(), e).unwrap();
        let b = random_instance(&mut ChaCha8Rng::seed_from_u64(3), RandomShape::default(), e).unwrap();
        assert_eq!(a.lambda(), b.lambda());
        assert_eq!(a.sigma_leaves(), b.sigma_leaves());
        assert!(a.is_active(0) || a.active_count() < a.tree.node_count());
    }
}
