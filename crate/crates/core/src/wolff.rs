//! Local γ-averages of the localized sums, generalized discrete Wolff
//! potentials and the logarithmic oscillation ratio.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::tree::{Exponents, Instance};

/// `(⟨ρ_Q^γ⟩^ω_Q)^{1/γ}` for one vector of leaf values under `Q`.
///
/// `γ = 0` is the geometric mean, `γ = ±∞` the ω-essential inf/sup. For
/// `γ < 0` a vanishing value forces the mean to zero.
pub fn power_mean(values: &[f64], weights: &[f64], gamma: f64) -> f64 {
    let total: f64 = weights.iter().sum();
    if total == 0.0 {
        return 0.0;
    }
    let charged = values.iter().zip(weights).filter(|(_, &w)| w > 0.0).map(|(&v, &w)| (v, w));
    if gamma == f64::NEG_INFINITY {
        return charged.map(|(v, _)| v).fold(f64::INFINITY, f64::min);
    }
    if gamma == f64::INFINITY {
        return charged.map(|(v, _)| v).fold(0.0, f64::max);
    }
    if gamma == 0.0 {
        let mut s = 0.0;
        for (v, w) in charged {
            if v == 0.0 {
                return 0.0;
            }
            s += v.ln() * w;
        }
        return (s / total).exp();
    }
    if gamma == 1.0 {
        return charged.map(|(v, w)| v * w).sum::<f64>() / total;
    }
    let mut s = 0.0;
    for (v, w) in charged {
        if v == 0.0 {
            if gamma < 0.0 {
                return 0.0;
            }
            continue;
        }
        s += v.powf(gamma) * w;
    }
    (s / total).powf(1.0 / gamma)
}

/// `Λ_{γ,Q}` for a single cube with `ω(Q) > 0`.
pub fn lambda_gamma(inst: &Instance, q: usize, gamma: f64) -> Result<f64> {
    if inst.omega()[q] == 0.0 {
        return Err(Error::Domain(format!("ω vanishes on cube {:?}", inst.tree.path(q))));
    }
    if gamma.is_nan() {
        return Err(Error::Parameter("γ must not be NaN".into()));
    }
    let w = &inst.omega_leaves()[inst.tree.leaf_range(q)];
    Ok(power_mean(&inst.localized_sum(q), w, gamma))
}

/// `Λ_{γ,Q}` for every node; zero where `ω(Q) = 0`.
pub fn lambda_gamma_all(inst: &Instance, gamma: f64) -> Vec<f64> {
    let t = &inst.tree;
    if gamma == 1.0 {
        return lambda_one(inst);
    }
    let w = inst.omega_leaves();
    (0..t.node_count())
        .map(|q| if inst.omega()[q] > 0.0 { power_mean(&inst.localized_sum(q), &w[t.leaf_range(q)], gamma) } else { 0.0 })
        .collect()
}

/// `Λ_{1,Q} = ω(Q)^{-1} Σ_{R⊆Q} λ_R ω(R)` in one bottom-up pass.
pub fn lambda_one(inst: &Instance) -> Vec<f64> {
    let lw: Vec<f64> = inst.lambda_active().iter().zip(inst.omega()).map(|(l, w)| l * w).collect();
    let s = inst.tree.subtree_sum(&lw);
    s.iter().zip(inst.omega()).map(|(&a, &w)| if w > 0.0 { a / w } else { 0.0 }).collect()
}

fn require_p_gt_one(e: &Exponents) -> Result<()> {
    if e.p <= 1.0 {
        return Err(Error::Parameter(format!("the Wolff potential needs p > 1, got {}", e.p)));
    }
    Ok(())
}

/// `W(x) = Σ_{Q∋x, Q∈𝒬} λ_Q (ω(Q)/σ(Q))^{p′−1} Λ_{γ,Q}^{p′−1}`.
pub fn wolff_potential(inst: &Instance, gamma: f64) -> Result<Vec<f64>> {
    require_p_gt_one(&inst.exponents)?;
    let e = inst.exponents.p_prime() - 1.0;
    let lg = lambda_gamma_all(inst, gamma);
    Ok(potential_from(inst, &lg, e))
}

fn potential_from(inst: &Instance, lg: &[f64], e: f64) -> Vec<f64> {
    let t = &inst.tree;
    let lam = inst.lambda_active();
    let node: Vec<f64> = (0..t.node_count())
        .map(|q| if lam[q] > 0.0 { lam[q] * (inst.omega()[q] / inst.sigma()[q] * lg[q]).powf(e) } else { 0.0 })
        .collect();
    t.leaves(&t.ancestor_sum(&node)).to_vec()
}

/// `∫ W^{(p−1)q/(p−q)} dω` for a precomputed potential.
pub fn condition_from_potential(inst: &Instance, w: &[f64]) -> f64 {
    let Exponents { p, q, .. } = inst.exponents;
    let e = (p - 1.0) * q / (p - q);
    w.iter().zip(inst.omega_leaves()).filter(|(_, &m)| m > 0.0).map(|(&v, &m)| v.powf(e) * m).sum()
}

pub fn wolff_condition_value(inst: &Instance, gamma: f64) -> Result<f64> {
    Ok(condition_from_potential(inst, &wolff_potential(inst, gamma)?))
}

/// `max_{Q∈𝒬} sup ρ_Q / inf ρ_Q` over ω-charged leaves under `Q`.
pub fn dlbo_ratio(inst: &Instance) -> f64 {
    let t = &inst.tree;
    let w = inst.omega_leaves();
    let mut worst: f64 = 1.0;
    for q in inst.active_collection() {
        let rho = inst.localized_sum(q);
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for (r, x) in rho.iter().zip(t.leaf_range(q)) {
            if w[x] > 0.0 {
                lo = lo.min(*r);
                hi = hi.max(*r);
            }
        }
        let ratio = if lo == 0.0 { if hi > 0.0 { f64::INFINITY } else { 1.0 } } else { hi / lo };
        worst = worst.max(ratio);
    }
    worst
}

#[derive(Debug, Clone, Serialize)]
pub struct WolffReport {
    pub gamma: f64,
    pub potential: Vec<f64>,
    pub condition_value: f64,
    pub dlbo_ratio: f64,
}

pub fn wolff_report(inst: &Instance, gamma: f64) -> Result<WolffReport> {
    let potential = wolff_potential(inst, gamma)?;
    let condition_value = condition_from_potential(inst, &potential);
    Ok(WolffReport { gamma, condition_value, dlbo_ratio: dlbo_ratio(inst), potential })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::DyadicTree;
    use approx::assert_relative_eq;

    fn inst(d: usize, lambda: Vec<f64>, s: &[f64], w: &[f64]) -> Instance {
        Instance::new(DyadicTree::new(2, d).unwrap(), lambda, s, w, Exponents::new(2.0, 0.5, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn two_leaf_gamma_means() {
        let i = inst(1, vec![1.0, 1.0, 0.0], &[1.0, 1.0], &[0.5, 0.5]);
        assert_relative_eq!(lambda_gamma(&i, 0, 1.0).unwrap(), 1.5);
        assert_relative_eq!(lambda_gamma(&i, 0, 2.0).unwrap(), 2.5f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(lambda_gamma(&i, 0, 0.0).unwrap(), 2f64.sqrt(), max_relative = 1e-15);
        assert_eq!(lambda_gamma(&i, 0, f64::NEG_INFINITY).unwrap(), 1.0);
        assert_eq!(lambda_gamma(&i, 1, 3.0).unwrap(), 1.0);
        assert_eq!(lambda_gamma(&i, 2, -1.0).unwrap(), 0.0);
    }

    #[test]
    fn constant_rho_and_domain() {
        let i = inst(2, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0], &[1.0; 4], &[1.0, 0.0, 2.0, 3.0]);
        for g in [-2.0, 0.0, 0.5, 1.0, 4.0] {
            assert_relative_eq!(lambda_gamma(&i, 0, g).unwrap(), 1.0, max_relative = 1e-15);
        }
        assert!(matches!(lambda_gamma(&i, 4, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn gamma_one_identity_matches_general_path() {
        let lam = vec![0.5, 1.0, 2.0, 0.25, 0.7, 3.0, 1.5];
        let i = inst(2, lam, &[1.0, 2.0, 3.0, 4.0], &[0.3, 1.1, 0.0, 2.0]);
        let fast = lambda_one(&i);
        let w = i.omega_leaves();
        for q in 0..7 {
            let slow = power_mean(&i.localized_sum(q), &w[i.tree.leaf_range(q)], 1.0 + 0.0);
            assert_relative_eq!(fast[q], slow, max_relative = 1e-14);
        }
    }

    #[test]
    fn single_cube_potential() {
        let i = inst(0, vec![1.0], &[1.0], &[1.0]);
        assert_eq!(wolff_potential(&i, 1.0).unwrap(), vec![1.0]);
        assert_eq!(wolff_condition_value(&i, 1.0).unwrap(), 1.0);
        let p1 = i.with_exponents(Exponents::new(1.0, 0.5, 1.0).unwrap()).unwrap();
        assert!(wolff_potential(&p1, 1.0).is_err());
    }

    #[test]
    fn dlbo_examples() {
        let i = inst(1, vec![1.0, 0.0, 0.0], &[1.0; 2], &[1.0; 2]);
        assert_eq!(dlbo_ratio(&i), 1.0);
        let i = inst(1, vec![1.0, 3.0, 0.0], &[1.0; 2], &[1.0; 2]);
        assert_eq!(dlbo_ratio(&i), 4.0);
    }
}
