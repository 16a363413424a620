//! Discrete Littlewood–Paley norms `f^{r,s}(μ)` over the active collection,
//! their duality and factorization, and the summation-by-parts comparisons.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{param, Result};
use crate::optim::{div0, fd_ascent, pow};
use crate::tree::{Instance, Side};

/// Exponent pair `(r, s)` and the measure the norm integrates against.
/// `r ∈ (0, ∞]`, `s ∈ ℝ \ {0} ∪ {∞}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FNorm {
    pub r: f64,
    pub s: f64,
    pub side: Side,
}

impl FNorm {
    pub fn new(r: f64, s: f64, side: Side) -> Result<Self> {
        if !(r > 0.0) {
            return param(format!("r must be positive, got {r}"));
        }
        if s == 0.0 || s.is_nan() || s == f64::NEG_INFINITY {
            return param(format!("s must be a nonzero real or +∞, got {s}"));
        }
        Ok(Self { r, s, side })
    }
}

/// `s`-th powers of an active family, with `0^{negative} = ∞`.
fn powered(inst: &Instance, a: &[f64], s: f64) -> Vec<f64> {
    a.iter()
        .enumerate()
        .map(|(i, &x)| if inst.is_active(i) { pow(x, s) } else { 0.0 })
        .collect()
}

/// `‖a‖_{f^{r,s}(μ)}` with all indexation restricted to the active collection.
///
/// Returns `+∞` when a negative `s` meets a vanishing coefficient on a set of
/// positive measure.
pub fn f_norm(inst: &Instance, a: &[f64], norm: FNorm) -> f64 {
    let t = &inst.tree;
    let mu = inst.measure(norm.side);
    let mu_leaf = t.leaves(mu);
    let FNorm { r, s, .. } = norm;
    if s < 0.0 && (0..t.node_count()).any(|q| inst.is_active(q) && a[q] == 0.0 && mu[q] > 0.0) {
        return f64::INFINITY;
    }
    match (r.is_infinite(), s.is_infinite()) {
        (false, false) => {
            let acc = t.ancestor_sum(&powered(inst, a, s));
            let total: f64 = t
                .leaves(&acc)
                .iter()
                .zip(mu_leaf)
                .filter(|(_, &m)| m > 0.0)
                .map(|(&v, &m)| pow(v, r / s) * m)
                .sum();
            pow(total, 1.0 / r)
        }
        (false, true) => {
            let env = t.ancestor_max(&inst.mask(a));
            let total: f64 = t
                .leaves(&env)
                .iter()
                .zip(mu_leaf)
                .filter(|(_, &m)| m > 0.0)
                .map(|(&v, &m)| v.powf(r) * m)
                .sum();
            total.powf(1.0 / r)
        }
        (true, false) => {
            let weighted: Vec<f64> =
                powered(inst, a, s).iter().zip(mu).map(|(&v, &m)| if m > 0.0 { v * m } else { 0.0 }).collect();
            let sub = t.subtree_sum(&weighted);
            (0..t.node_count())
                .filter(|&q| inst.is_active(q) && mu[q] > 0.0)
                .map(|q| pow(sub[q] / mu[q], 1.0 / s))
                .fold(0.0, f64::max)
        }
        (true, true) => (0..t.node_count()).filter(|&q| inst.is_active(q)).map(|q| a[q]).fold(0.0, f64::max),
    }
}

/// `‖{a^t}‖_{f^{r,s}} / ‖a‖_{f^{tr,ts}}^t`, which equals one.
pub fn f_norm_scaling_check(inst: &Instance, a: &[f64], r: f64, s: f64, t: f64, side: Side) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return param("scaling exponent must be positive and finite");
    }
    let at: Vec<f64> = a.iter().map(|&x| pow(x, t)).collect();
    let lhs = f_norm(inst, &at, FNorm::new(r, s, side)?);
    let rhs = f_norm(inst, a, FNorm::new(t * r, t * s, side)?).powf(t);
    Ok(div0(lhs, rhs))
}

/// Hölder conjugate on `[1, ∞]`.
pub fn conjugate(r: f64) -> f64 {
    if r == 1.0 {
        f64::INFINITY
    } else if r.is_infinite() {
        1.0
    } else {
        r / (r - 1.0)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DualEstimate {
    pub value: f64,
    /// Maximizing `b`, normalized so that `‖b‖_{f^{r′,s′}} = 1`.
    pub b: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

pub const DUAL_RESTARTS: usize = 8;
pub const DUAL_MAX_ITER: usize = 10_000;

/// `sup { Σ a_Q b_Q μ(Q) : b ≥ 0, ‖b‖_{f^{r′,s′}} ≤ 1 }`, by ascent on the
/// projectively invariant ratio in log-coordinates with multi-start.
pub fn f_norm_dual(inst: &Instance, a: &[f64], r: f64, s: f64, side: Side, seed: u64) -> Result<DualEstimate> {
    if !(r >= 1.0 && s >= 1.0) {
        return param("duality needs r, s in [1, ∞]");
    }
    let dual = FNorm::new(conjugate(r), conjugate(s), side)?;
    let mu = inst.measure(side);
    let n = inst.tree.node_count();
    let vars: Vec<usize> = (0..n).filter(|&q| inst.is_active(q) && mu[q] > 0.0).collect();
    if vars.iter().all(|&q| a[q] == 0.0) {
        return Ok(DualEstimate { value: 0.0, b: vec![0.0; n], iterations: 0, converged: true });
    }
    let expand = |u: &[f64]| {
        let mut b = vec![0.0; n];
        for (k, &q) in vars.iter().enumerate() {
            b[q] = u[k].exp();
        }
        b
    };
    let objective = |u: &[f64]| {
        let b = expand(u);
        let pairing: f64 = vars.iter().map(|&q| a[q] * b[q] * mu[q]).sum();
        let norm = f_norm(inst, &b, dual);
        if pairing <= 0.0 || !(norm > 0.0) || !norm.is_finite() {
            return f64::NEG_INFINITY;
        }
        pairing.ln() - norm.ln()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut iterations = 0;
    let mut converged = true;
    for restart in 0..DUAL_RESTARTS {
        let u0: Vec<f64> = if restart == 0 {
            vec![0.0; vars.len()]
        } else {
            (0..vars.len()).map(|_| rng.gen_range(-2.0..2.0)).collect()
        };
        let run = fd_ascent(&objective, u0, DUAL_MAX_ITER, 1e-12);
        iterations += run.iterations;
        converged &= run.converged;
        if best.as_ref().is_none_or(|(v, _)| run.value > *v) {
            best = Some((run.value, run.x));
        }
    }
    let (value, u) = best.expect("at least one restart");
    let mut b = expand(&u);
    let norm = f_norm(inst, &b, dual);
    b.iter_mut().for_each(|x| *x /= norm);
    Ok(DualEstimate { value: value.exp(), b, iterations, converged })
}

#[derive(Debug, Clone, Serialize)]
pub struct Factorization {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    /// `‖a‖ ‖b‖ / ‖c‖` for the returned pair.
    pub constant: f64,
    pub refined: bool,
}

pub const FACTORIZATION_BOUND: f64 = 100.0;

fn recip(r: f64) -> f64 {
    if r.is_infinite() {
        0.0
    } else {
        1.0 / r
    }
}

/// Split `c = a b` with `a ∈ f^{r1,s1}`, `b ∈ f^{r2,s2}`.
///
/// The core split `c = U V` takes `U_Q = (μ(Q)^{-1} Σ_{R⊆Q} c_R^s μ(R))^{1/s}`
/// (the `f^{r,∞}` factor) and `V = c / U` (the `f^{∞,s}` factor); power
/// splits of `U` and `V` then give `a` and `b`. When the resulting constant
/// exceeds [`FACTORIZATION_BOUND`] the pair is refined numerically under the
/// exact product constraint.
pub fn f_factorize(
    inst: &Instance,
    c: &[f64],
    rs: (f64, f64),
    rs1: (f64, f64),
    rs2: (f64, f64),
    side: Side,
) -> Result<Factorization> {
    let ((r, s), (r1, s1), (r2, s2)) = (rs, rs1, rs2);
    for &x in &[r, s, r1, s1, r2, s2] {
        if !(x > 0.0) {
            return param("factorization exponents must be positive");
        }
    }
    if (recip(r) - recip(r1) - recip(r2)).abs() > 1e-12 || (recip(s) - recip(s1) - recip(s2)).abs() > 1e-12 {
        return param(format!(
            "Hölder relations violated: 1/{r} vs 1/{r1} + 1/{r2}, 1/{s} vs 1/{s1} + 1/{s2}"
        ));
    }
    let n = inst.tree.node_count();
    let mu = inst.measure(side);
    let c = inst.mask(c);
    let (u, v) = if s.is_infinite() {
        (c.clone(), c.iter().map(|&x| if x > 0.0 { 1.0 } else { 0.0 }).collect::<Vec<_>>())
    } else if r.is_infinite() {
        (c.iter().map(|&x| if x > 0.0 { 1.0 } else { 0.0 }).collect(), c.clone())
    } else {
        let weighted: Vec<f64> = c.iter().zip(mu).map(|(&x, &m)| x.powf(s) * m).collect();
        let sub = inst.tree.subtree_sum(&weighted);
        let u: Vec<f64> = (0..n).map(|q| if c[q] > 0.0 { (sub[q] / mu[q]).powf(1.0 / s) } else { 0.0 }).collect();
        let v = (0..n).map(|q| div0(c[q], u[q])).collect();
        (u, v)
    };
    let th = |ri: f64| if r.is_infinite() { 0.5 } else { r * recip(ri) };
    let ph = |si: f64| if s.is_infinite() { 0.5 } else { s * recip(si) };
    let (t1, f1) = (th(r1), ph(s1));
    let mut a: Vec<f64> = (0..n).map(|q| if c[q] > 0.0 { u[q].powf(t1) * v[q].powf(f1) } else { 0.0 }).collect();
    let mut b: Vec<f64> = (0..n).map(|q| div0(c[q], a[q])).collect();
    let n1 = FNorm::new(r1, s1, side)?;
    let n2 = FNorm::new(r2, s2, side)?;
    let nc = f_norm(inst, &c, FNorm::new(r, s, side)?);
    if nc == 0.0 {
        return Ok(Factorization { a: vec![0.0; n], b: vec![0.0; n], constant: 0.0, refined: false });
    }
    let mut constant = f_norm(inst, &a, n1) * f_norm(inst, &b, n2) / nc;
    let mut refined = false;
    if !(constant <= FACTORIZATION_BOUND) {
        let vars: Vec<usize> = (0..n).filter(|&q| c[q] > 0.0).collect();
        let build = |w: &[f64]| {
            let mut a = vec![0.0; n];
            let mut b = vec![0.0; n];
            for (k, &q) in vars.iter().enumerate() {
                a[q] = w[k].exp();
                b[q] = c[q] / a[q];
            }
            (a, b)
        };
        let obj = |w: &[f64]| {
            let (a, b) = build(w);
            -(f_norm(inst, &a, n1).ln() + f_norm(inst, &b, n2).ln())
        };
        let w0: Vec<f64> = vars.iter().map(|&q| a[q].ln()).collect();
        let run = fd_ascent(&obj, w0, 2_000, 1e-12);
        let (a2, b2) = build(&run.x);
        let c2 = f_norm(inst, &a2, n1) * f_norm(inst, &b2, n2) / nc;
        if c2 < constant {
            a = a2;
            b = b2;
            constant = c2;
            refined = true;
        }
    }
    Ok(Factorization { a, b, constant, refined })
}

/// Extreme pairwise ratios of a list of comparable quantities.
pub fn ratio_bracket(values: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for (i, &x) in values.iter().enumerate() {
        for (j, &y) in values.iter().enumerate() {
            if i != j {
                let r = if x == 0.0 && y == 0.0 { 1.0 } else { x / y };
                lo = lo.min(r);
                hi = hi.max(r);
            }
        }
    }
    if values.len() < 2 {
        (1.0, 1.0)
    } else {
        (lo, hi)
    }
}

/// The three summation-by-parts expressions, integrated:
/// `∫(Σ a 1_Q)^p`, `Σ a_Q μ(Q)(Σ_{R⊇Q} a_R)^{p−1}`,
/// `Σ a_Q ∫_Q (Σ_{R⊆Q} a_R 1_R)^{p−1}`.
pub fn summation_by_parts_terms(inst: &Instance, a: &[f64], p: f64, side: Side) -> [f64; 3] {
    let t = &inst.tree;
    let a = inst.mask(a);
    let mu = inst.measure(side);
    let mu_leaf = t.leaves(mu);
    let up = t.ancestor_sum(&a);
    let e1 = t.leaves(&up).iter().zip(mu_leaf).filter(|(_, &m)| m > 0.0).map(|(&v, &m)| v.powf(p) * m).sum();
    let e2 = (0..t.node_count()).filter(|&q| a[q] > 0.0 && mu[q] > 0.0).map(|q| a[q] * mu[q] * up[q].powf(p - 1.0)).sum();
    let mut e3 = 0.0;
    for q in (0..t.node_count()).filter(|&q| a[q] > 0.0 && mu[q] > 0.0) {
        let rho = crate::tree::localized_sum(t, &a, q);
        let inner: f64 = t
            .leaf_range(q)
            .zip(&rho)
            .filter(|(x, _)| mu_leaf[*x] > 0.0)
            .map(|(x, &v)| v.powf(p - 1.0) * mu_leaf[x])
            .sum();
        e3 += a[q] * inner;
    }
    [e1, e2, e3]
}

pub fn summation_by_parts_ratio(inst: &Instance, a: &[f64], p: f64, side: Side) -> Result<(f64, f64)> {
    if !(p > 0.0 && p.is_finite()) {
        return param("p must lie in (0, ∞)");
    }
    Ok(ratio_bracket(&summation_by_parts_terms(inst, a, p, side)))
}

/// `∫(Σ a 1_Q)^p`, `Σ a_Q μ(Q)(avg_Q)^{p−1}`, `∫(sup_Q avg_Q 1_Q)^p` and
/// `Σ a_Q μ(Q)(sup_{R⊇Q} avg_R)^{p−1}` where `avg_Q = μ(Q)^{-1} Σ_{R⊆Q} a_R μ(R)`.
pub fn equivalent_expressions_terms(inst: &Instance, a: &[f64], p: f64, side: Side) -> [f64; 4] {
    let t = &inst.tree;
    let a = inst.mask(a);
    let mu = inst.measure(side);
    let mu_leaf = t.leaves(mu);
    let n = t.node_count();
    let up = t.ancestor_sum(&a);
    let e1 = t.leaves(&up).iter().zip(mu_leaf).filter(|(_, &m)| m > 0.0).map(|(&v, &m)| v.powf(p) * m).sum();
    let weighted: Vec<f64> = a.iter().zip(mu).map(|(&x, &m)| x * m).collect();
    let sub = t.subtree_sum(&weighted);
    let avg: Vec<f64> = (0..n).map(|q| if a[q] > 0.0 { div0(sub[q], mu[q]) } else { 0.0 }).collect();
    let env = t.ancestor_max(&avg);
    let charged = |q: &usize| a[*q] > 0.0 && mu[*q] > 0.0;
    let e2 = (0..n).filter(charged).map(|q| a[q] * mu[q] * avg[q].powf(p - 1.0)).sum();
    let e3 = t.leaves(&env).iter().zip(mu_leaf).filter(|(_, &m)| m > 0.0).map(|(&v, &m)| v.powf(p) * m).sum();
    let e4 = (0..n).filter(charged).map(|q| a[q] * mu[q] * env[q].powf(p - 1.0)).sum();
    [e1, e2, e3, e4]
}

pub fn equivalent_expressions_ratio(inst: &Instance, a: &[f64], p: f64, side: Side) -> Result<(f64, f64)> {
    if !(p > 1.0 && p.is_finite()) {
        return param("p must lie in (1, ∞)");
    }
    Ok(ratio_bracket(&equivalent_expressions_terms(inst, a, p, side)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{DyadicTree, Exponents};
    use approx::assert_relative_eq;

    fn inst(b: usize, d: usize, lambda: Vec<f64>, s: &[f64], w: &[f64]) -> Instance {
        Instance::new(DyadicTree::new(b, d).unwrap(), lambda, s, w, Exponents::default()).unwrap()
    }

    fn full(d: usize) -> Instance {
        let n = (1 << (d + 1)) - 1;
        let l = 1 << d;
        inst(2, d, vec![1.0; n], &vec![1.0; l], &vec![1.0; l])
    }

    #[test]
    fn norm_examples() {
        let i = full(1);
        let a = [1.0, 0.0, 0.0];
        assert_relative_eq!(f_norm(&i, &a, FNorm::new(2.0, 1.0, Side::Omega).unwrap()), 2f64.sqrt(), max_relative = 1e-15);
        let i0 = inst(2, 0, vec![1.0], &[5.0], &[5.0]);
        assert_eq!(f_norm(&i0, &[1.0], FNorm::new(f64::INFINITY, 3.0, Side::Sigma).unwrap()), 1.0);
        let a = [2.0, 1.0, 0.0];
        assert_eq!(f_norm(&i, &a, FNorm::new(1.0, f64::INFINITY, Side::Omega).unwrap()), 4.0);
        assert_eq!(f_norm(&i, &a, FNorm::new(f64::INFINITY, f64::INFINITY, Side::Omega).unwrap()), 2.0);
    }

    #[test]
    fn carleson_regime_by_hand() {
        // a = (1, 2, 0), μ leaves (1, 3), s = 1: root average (1·4 + 2·1)/4, left child 2.
        let i = inst(2, 1, vec![1.0; 3], &[1.0, 3.0], &[1.0, 3.0]);
        let v = f_norm(&i, &[1.0, 2.0, 0.0], FNorm::new(f64::INFINITY, 1.0, Side::Sigma).unwrap());
        assert_eq!(v, 2.0);
        let v = f_norm(&i, &[3.0, 2.0, 0.0], FNorm::new(f64::INFINITY, 1.0, Side::Sigma).unwrap());
        assert_eq!(v, 3.5);
    }

    #[test]
    fn negative_s_is_literal() {
        let i = full(1);
        let v = f_norm(&i, &[1.0, 0.0, 1.0], FNorm::new(1.0, -1.0, Side::Omega).unwrap());
        assert!(v.is_infinite());
        let v = f_norm(&i, &[1.0, 1.0, 1.0], FNorm::new(1.0, -1.0, Side::Omega).unwrap());
        assert_relative_eq!(v, 1.0, max_relative = 1e-15);
    }

    #[test]
    fn scaling_examples() {
        let i = full(2);
        let a: Vec<f64> = (0..7).map(|k| 0.5 + k as f64).collect();
        assert_eq!(f_norm_scaling_check(&i, &a, 2.0, 1.0, 1.0, Side::Sigma).unwrap(), 1.0);
        let i0 = inst(2, 0, vec![1.0], &[1.0], &[1.0]);
        assert_relative_eq!(f_norm_scaling_check(&i0, &[4.0], 1.0, 1.0, 0.5, Side::Omega).unwrap(), 1.0);
        for &(r, s) in &[(2.0, 1.0), (f64::INFINITY, 2.0), (1.5, f64::INFINITY), (f64::INFINITY, f64::INFINITY)] {
            let ratio = f_norm_scaling_check(&i, &a, r, s, 0.7, Side::Sigma).unwrap();
            assert_relative_eq!(ratio, 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn dual_single_node() {
        let i0 = inst(2, 0, vec![1.0], &[1.0], &[1.0]);
        let d = f_norm_dual(&i0, &[3.0], 2.0, 2.0, Side::Sigma, 1).unwrap();
        assert_relative_eq!(d.value, 3.0, max_relative = 1e-9);
        let d = f_norm_dual(&i0, &[0.0], 2.0, 2.0, Side::Sigma, 1).unwrap();
        assert_eq!(d.value, 0.0);
    }

    #[test]
    fn dual_of_l2_l2_is_exact() {
        // f^{2,2} is a weighted ℓ² space: ‖a‖² = Σ a_Q² μ(Q), self-dual.
        let i = inst(2, 2, vec![1.0; 7], &[1.0, 2.0, 0.5, 1.5], &[1.0; 4]);
        let a: Vec<f64> = (0..7).map(|k| 1.0 + (k % 3) as f64).collect();
        let direct = f_norm(&i, &a, FNorm::new(2.0, 2.0, Side::Sigma).unwrap());
        let brute: f64 = (0..7).map(|q| a[q] * a[q] * i.sigma()[q]).sum::<f64>().sqrt();
        assert_relative_eq!(direct, brute, max_relative = 1e-14);
        let d = f_norm_dual(&i, &a, 2.0, 2.0, Side::Sigma, 3).unwrap();
        assert_relative_eq!(d.value, direct, max_relative = 1e-6);
    }

    #[test]
    fn factorization_trivial_split_is_exact() {
        let i = inst(2, 2, vec![1.0; 7], &[1.0, 2.0, 0.5, 1.5], &[1.0; 4]);
        let c: Vec<f64> = (0..7).map(|k| 0.3 + k as f64).collect();
        let f = f_factorize(&i, &c, (1.5, 2.0), (3.0, 4.0), (3.0, 4.0), Side::Sigma).unwrap();
        for q in 0..7 {
            assert_relative_eq!(f.a[q], c[q].sqrt(), max_relative = 1e-14);
            assert_relative_eq!(f.a[q] * f.b[q], c[q], max_relative = 1e-14);
        }
        assert_relative_eq!(f.constant, 1.0, max_relative = 1e-12);
        let z = f_factorize(&i, &[0.0; 7], (1.0, 1.0), (2.0, 2.0), (2.0, 2.0), Side::Sigma).unwrap();
        assert!(z.a.iter().chain(&z.b).all(|&x| x == 0.0));
        assert!(f_factorize(&i, &c, (1.0, 1.0), (2.0, 2.0), (3.0, 2.0), Side::Sigma).is_err());
    }

    #[test]
    fn sbp_examples() {
        let i0 = inst(2, 0, vec![1.0], &[2.0], &[2.0]);
        assert_eq!(summation_by_parts_ratio(&i0, &[3.0], 2.5, Side::Sigma).unwrap(), (1.0, 1.0));
        let i = full(2);
        let a: Vec<f64> = (0..7).map(|k| 0.25 + k as f64).collect();
        let [e1, e2, _] = summation_by_parts_terms(&i, &a, 1.0, Side::Sigma);
        assert_relative_eq!(e1, e2, max_relative = 1e-14);
        let mut root = vec![0.0; 7];
        root[0] = 2.0;
        let (lo, hi) = equivalent_expressions_ratio(&i, &root, 1.5, Side::Sigma).unwrap();
        assert_relative_eq!(lo, 1.0, max_relative = 1e-14);
        assert_relative_eq!(hi, 1.0, max_relative = 1e-14);
    }
}
