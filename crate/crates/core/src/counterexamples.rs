//! Chain constructions separating the generalized Wolff conditions from the
//! two-weight inequality, the Riesz model coefficients and a classifier for
//! log-weighted power series.
//!
//! Both chains can be evaluated in streaming mode, without a tree, at depths
//! far beyond what can be materialized.

use serde::Serialize;

use crate::error::{param, Error, Result};
use crate::lp::conjugate;
use crate::tree::{DyadicTree, Exponents, Instance};

/// Largest node count for which a chain is materialized as a tree.
pub const MATERIALIZE_NODE_CAP: usize = 1 << 20;

/// `Σ_{m=l}^{N} w_m (C_m − C_{l−1})^γ` for every `l`, with `C` strictly
/// increasing, positive, and `C_{−1} = 0`.
///
/// Blocks of consecutive `m` far from `C_{l−1}` are summed through binomial
/// moment expansions around the block start, so the total cost is
/// `O(N log N · K)` instead of `O(N²)`.
pub fn shifted_power_sums(c: &[f64], w: &[f64], gamma: f64) -> Vec<f64> {
    ShiftedSums::new(c, w, gamma).all()
}

const LEAF_BLOCK: usize = 16;
const TERMS: usize = 44;
/// A block is expanded when its width is at most `SEPARATION` times its
/// distance to the shift; the truncation error is below `SEPARATION^TERMS`.
const SEPARATION: f64 = 0.5;

struct Level {
    size: usize,
    base: Vec<f64>,
    width: Vec<f64>,
    /// `Σ w_m ((C_m − base)/width)^j`, `TERMS` per block.
    moments: Vec<f64>,
}

struct ShiftedSums<'a> {
    c: &'a [f64],
    w: &'a [f64],
    gamma: f64,
    binom: [f64; TERMS],
    levels: Vec<Level>,
}

impl<'a> ShiftedSums<'a> {
    fn new(c: &'a [f64], w: &'a [f64], gamma: f64) -> Self {
        let n = c.len();
        let mut binom = [0.0; TERMS];
        binom[0] = 1.0;
        for j in 1..TERMS {
            binom[j] = binom[j - 1] * (gamma - (j - 1) as f64) / j as f64;
        }
        let mut levels = Vec::new();
        let mut size = LEAF_BLOCK;
        loop {
            let blocks = n.div_ceil(size).max(1);
            let mut base = Vec::with_capacity(blocks);
            let mut width = Vec::with_capacity(blocks);
            let mut moments = vec![0.0; blocks * TERMS];
            for b in 0..blocks {
                let (lo, hi) = (b * size, ((b + 1) * size).min(n));
                let c0 = if lo < n { c[lo] } else { 0.0 };
                let wd = if hi > lo { c[hi - 1] - c0 } else { 0.0 };
                base.push(c0);
                width.push(wd);
                let mo = &mut moments[b * TERMS..(b + 1) * TERMS];
                for m in lo..hi {
                    let u = if wd > 0.0 { (c[m] - c0) / wd } else { 0.0 };
                    let mut pw = w[m];
                    for slot in mo.iter_mut() {
                        *slot += pw;
                        pw *= u;
                        if pw == 0.0 {
                            break;
                        }
                    }
                }
            }
            levels.push(Level { size, base, width, moments });
            if blocks == 1 {
                break;
            }
            size *= 2;
        }
        Self { c, w, gamma, binom, levels }
    }

    fn query(&self, l: usize) -> f64 {
        let n = self.c.len();
        let shift = if l == 0 { 0.0 } else { self.c[l - 1] };
        let mut total = 0.0;
        let mut stack = vec![(self.levels.len() - 1, 0usize)];
        while let Some((h, b)) = stack.pop() {
            let lv = &self.levels[h];
            let (lo, hi) = (b * lv.size, ((b + 1) * lv.size).min(n));
            if hi <= l || lo >= hi {
                continue;
            }
            let dist = lv.base[b] - shift;
            if lo >= l && dist > 0.0 && lv.width[b] <= SEPARATION * dist {
                let ratio = lv.width[b] / dist;
                let mo = &lv.moments[b * TERMS..(b + 1) * TERMS];
                let mut acc = 0.0;
                let mut pw = 1.0;
                for j in 0..TERMS {
                    acc += self.binom[j] * pw * mo[j];
                    pw *= ratio;
                }
                total += dist.powf(self.gamma) * acc;
            } else if h == 0 {
                for m in lo.max(l)..hi {
                    total += self.w[m] * (self.c[m] - shift).powf(self.gamma);
                }
            } else {
                stack.push((h - 1, 2 * b + 1));
                stack.push((h - 1, 2 * b));
            }
        }
        total
    }

    fn all(&self) -> Vec<f64> {
        (0..self.c.len()).map(|l| self.query(l)).collect()
    }
}

/// Term `C (k+1)^{−a−1} log(k+2)^{−b}` of a log-weighted power series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesTerm {
    pub coefficient: f64,
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Converges,
    Diverges,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Classification {
    pub verdict: Verdict,
    /// Upper bound on `Σ_{j≥k}` of the terms for a convergent series.
    pub tail_bound: Option<f64>,
}

/// Integral test for `Σ C (k+1)^{−a−1} log(k+2)^{−b}`: converges iff `a > 0`,
/// or `a = 0` and `b > 1`. The tail bound is evaluated at `k ≥ 2`.
pub fn classify_series(term: SeriesTerm, k: u64) -> Classification {
    let SeriesTerm { coefficient: c, a, b } = term;
    let converges = a > 0.0 || (a == 0.0 && b > 1.0);
    let tail_bound = if !converges || k < 2 {
        None
    } else {
        let kf = k as f64;
        // Σ_{j≥k} f(j) ≤ f(k) + ∫_k^∞ f, with f decreasing from k on.
        let head = c * (kf + 1.0).powf(-a - 1.0) * (kf + 2.0).ln().powf(-b);
        let integral = if a == 0.0 {
            c * (kf + 1.0).ln().powf(1.0 - b) / (b - 1.0)
        } else if b >= 0.0 {
            c * (kf + 1.0).powf(-a) / a * (kf + 1.0).ln().powf(-b)
        } else {
            // Logarithmic growth: bound log(t+2)^{−b} by its value at a
            // point beyond which the power decay dominates.
            c * (kf + 1.0).powf(-a) / a * (kf + 2.0).ln().powf(-b) * (1.0 + (-b) / (a * (kf + 1.0).ln()))
        };
        Some(head + integral)
    };
    Classification { verdict: if converges { Verdict::Converges } else { Verdict::Diverges }, tail_bound }
}

/// Partial sums at three depths and the growth rate read off their
/// increments.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GrowthTrend {
    pub n: usize,
    pub quarter: f64,
    pub half: f64,
    pub full: f64,
    /// `log₂((S(N) − S(N/2)) / (S(N/2) − S(N/4)))`; the exponent `κ` of
    /// `S(N) ≈ c N^κ`, and near zero for logarithmic growth.
    pub slope: f64,
    pub verdict: Verdict,
}

fn prefix(terms: &[f64]) -> Vec<f64> {
    let mut s = 0.0;
    terms
        .iter()
        .map(|t| {
            s += t;
            s
        })
        .collect()
}

fn trend(partial: &[f64], verdict: Verdict) -> GrowthTrend {
    let n = partial.len() - 1;
    let (q, h, f) = (partial[n / 4], partial[n / 2], partial[n]);
    GrowthTrend { n, quarter: q, half: h, full: f, slope: ((f - h) / (h - q)).log2(), verdict }
}

/// Parameters of the descending chain: `P₀ ⊇ P₁ ⊇ … ⊇ P_N`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SmallGammaParams {
    pub p: f64,
    pub q: f64,
    pub gamma: f64,
    pub depth: usize,
    pub epsilon: f64,
    pub alpha: f64,
}

/// The descending chain with `λ_{P_j} = j^{α−1} log(j+2)^{−δ}`,
/// `ω(E_j) = (j+1)^{−β−1}`, `σ(P_j) = log(j+2)^{−ε}`, `αq = β`, `qδ = 1`.
/// `E_j = P_j \ P_{j+1}` for `j < N` and `E_N = P_N`.
#[derive(Debug, Clone, Serialize)]
pub struct SmallGammaChain {
    pub params: SmallGammaParams,
    pub beta: f64,
    pub delta: f64,
    pub lambda: Vec<f64>,
    pub omega_annulus: Vec<f64>,
    pub sigma_cube: Vec<f64>,
}

impl SmallGammaChain {
    pub fn new(params: SmallGammaParams) -> Result<Self> {
        let SmallGammaParams { p, q, gamma, depth, epsilon, alpha } = params;
        Exponents::new(p, q, gamma)?;
        if !(p > 1.0) {
            return param(format!("the chain needs p > 1, got {p}"));
        }
        if !(gamma > 0.0 && gamma < q) {
            return param(format!("γ must lie in (0, q) = (0, {q}), got {gamma}"));
        }
        if depth < 4 {
            return param(format!("depth must be at least 4, got {depth}"));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return param(format!("ε must lie in (0, 1), got {epsilon}"));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return param(format!("α must be positive, got {alpha}"));
        }
        let beta = alpha * q;
        let delta = 1.0 / q;
        let pp = conjugate(p);
        if !(beta - alpha * gamma > 0.0) {
            return param(format!("β − αγ = {} must be positive", beta - alpha * gamma));
        }
        if !(alpha * pp - beta * (pp - 1.0) > 0.0) {
            return param(format!("αp′ − β(p′−1) = {} must be positive", alpha * pp - beta * (pp - 1.0)));
        }
        let term = |j: usize| (j as f64).powf(alpha - 1.0) * ((j + 2) as f64).ln().powf(-delta);
        let lambda: Vec<f64> = (0..=depth).map(|j| if j == 0 { term(1) } else { term(j) }).collect();
        let omega_annulus = (0..=depth).map(|j| ((j + 1) as f64).powf(-beta - 1.0)).collect();
        let sigma_cube = (0..=depth).map(|j| ((j + 2) as f64).ln().powf(-epsilon)).collect();
        Ok(Self { params, beta, delta, lambda, omega_annulus, sigma_cube })
    }

    fn depth(&self) -> usize {
        self.params.depth
    }

    /// `ω(P_l) = Σ_{j≥l} ω(E_j)`.
    pub fn omega_cube(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.depth() + 1];
        let mut s = 0.0;
        for j in (0..=self.depth()).rev() {
            s += self.omega_annulus[j];
            out[j] = s;
        }
        out
    }

    /// `C_k = Σ_{l≤k} λ_{P_l}`.
    pub fn cumulative_lambda(&self) -> Vec<f64> {
        prefix(&self.lambda)
    }

    /// Terms `ω(E_k) (Σ_{l≤k} λ_{P_l})^q / σ(P₀)^{q/p}` of the necessary
    /// quantity `σ(P₀)^{−q/p} ∫ ρ_{P₀}^q dω`.
    pub fn necessary_terms(&self) -> Vec<f64> {
        let SmallGammaParams { p, q, .. } = self.params;
        let norm = self.sigma_cube[0].powf(-q / p);
        self.cumulative_lambda().iter().zip(&self.omega_annulus).map(|(c, w)| w * c.powf(q) * norm).collect()
    }

    /// `Λ_{γ,P_l}` for every `l`.
    pub fn lambda_gamma(&self) -> Vec<f64> {
        let g = self.params.gamma;
        let sums = shifted_power_sums(&self.cumulative_lambda(), &self.omega_annulus, g);
        sums.iter().zip(self.omega_cube()).map(|(s, w)| (s / w).powf(1.0 / g)).collect()
    }

    /// Terms `ω(E_k) W(E_k)^{(p−1)q/(p−q)}` of the γ-Wolff quantity, where
    /// `W(E_k) = Σ_{l≤k} λ_{P_l} (ω(P_l)/σ(P_l))^{p′−1} Λ_{γ,P_l}^{p′−1}`.
    pub fn wolff_terms(&self) -> Vec<f64> {
        let SmallGammaParams { p, q, .. } = self.params;
        let e = conjugate(p) - 1.0;
        let lg = self.lambda_gamma();
        let wc = self.omega_cube();
        let mut acc = 0.0;
        (0..=self.depth())
            .map(|l| {
                acc += self.lambda[l] * (wc[l] / self.sigma_cube[l] * lg[l]).powf(e);
                self.omega_annulus[l] * acc.powf((p - 1.0) * q / (p - q))
            })
            .collect()
    }

    /// Exponents `(a, b)` of the majorant of the γ-Wolff terms:
    /// `a = βp/(p−q) − αpq/(p−q)`, `b = (δpq − εq)/(p−q)`.
    pub fn wolff_majorant(&self) -> SeriesTerm {
        let SmallGammaParams { p, q, epsilon, alpha, .. } = self.params;
        SeriesTerm {
            coefficient: 1.0,
            a: (self.beta * p - alpha * p * q) / (p - q),
            b: (self.delta * p * q - epsilon * q) / (p - q),
        }
    }

    /// Exponents of the necessary-quantity terms: `a = β − αq`, `b = qδ`.
    pub fn necessary_majorant(&self) -> SeriesTerm {
        let SmallGammaParams { q, alpha, .. } = self.params;
        SeriesTerm { coefficient: 1.0, a: self.beta - alpha * q, b: q * self.delta }
    }

    /// The chain embedded along the leftmost path of a binary tree of depth
    /// `N`; annulus masses sit on the leftmost leaf of each off-path sibling.
    pub fn instance(&self) -> Result<Instance> {
        let n = self.depth();
        let tree = DyadicTree::with_cap(2, n, MATERIALIZE_NODE_CAP)?;
        let mut lambda = vec![0.0; tree.node_count()];
        let mut sigma = vec![0.0; tree.leaf_count()];
        let mut omega = vec![0.0; tree.leaf_count()];
        for j in 0..=n {
            lambda[(1usize << j) - 1] = self.lambda[j];
            let leaf = if j == n { 0 } else { 1usize << (n - j - 1) };
            omega[leaf] = self.omega_annulus[j];
            sigma[leaf] = if j == n { self.sigma_cube[n] } else { self.sigma_cube[j] - self.sigma_cube[j + 1] };
        }
        let SmallGammaParams { p, q, gamma, .. } = self.params;
        Instance::new(tree, lambda, &sigma, &omega, Exponents::new(p, q, gamma)?)
    }

    pub fn report(&self) -> SmallGammaReport {
        let nec = prefix(&self.necessary_terms());
        let wolff = prefix(&self.wolff_terms());
        let nm = self.necessary_majorant();
        let wm = self.wolff_majorant();
        SmallGammaReport {
            params: self.params,
            beta: self.beta,
            delta: self.delta,
            necessary: trend(&nec, classify_series(nm, 2).verdict),
            necessary_majorant: nm,
            wolff: trend(&wolff, classify_series(wm, 2).verdict),
            wolff_majorant: wm,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SmallGammaReport {
    pub params: SmallGammaParams,
    pub beta: f64,
    pub delta: f64,
    pub necessary: GrowthTrend,
    pub necessary_majorant: SeriesTerm,
    pub wolff: GrowthTrend,
    pub wolff_majorant: SeriesTerm,
}

/// Parameters of the ascending chain `P₀ ⊆ P₁ ⊆ … ⊆ P_N`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LargeGammaParams {
    pub p: f64,
    pub q: f64,
    pub depth: usize,
    pub beta: f64,
}

/// The ascending chain with `ω(E_j) = 2^{j+1}`, `σ` a unit mass on `P₀`, and
/// `λ_{P_j}^q ω(P_j) = (j+1)^{−β}`. Everything is kept in logarithms, since
/// `ω(P_N)` overflows long before the depths used in streaming mode.
#[derive(Debug, Clone, Serialize)]
pub struct LargeGammaChain {
    pub params: LargeGammaParams,
    pub alpha: f64,
}

impl LargeGammaChain {
    pub fn new(params: LargeGammaParams) -> Result<Self> {
        let LargeGammaParams { p, q, depth, beta } = params;
        Exponents::new(p, q, q)?;
        if !(p > 1.0) {
            return param(format!("the chain needs p > 1, got {p}"));
        }
        if depth < 4 {
            return param(format!("depth must be at least 4, got {depth}"));
        }
        let alpha = (p - 1.0) / (p - q);
        if !(beta > 1.0) {
            return param(format!("β must exceed 1, got {beta}"));
        }
        if !(alpha * beta < 1.0) {
            return param(format!("αβ = {} must be below 1 (α = (p−1)/(p−q) = {alpha})", alpha * beta));
        }
        Ok(Self { params, alpha })
    }

    /// `ω(E_j) / ω(P_j) = 2^{j+1} / (2^{j+2} − 2)`.
    fn annulus_share(j: usize) -> f64 {
        if j == 0 {
            1.0
        } else {
            0.5 / (1.0 - 0.5f64.powi((j + 1).min(1100) as i32))
        }
    }

    /// Terms `λ_{P_j}^q ω(P_j) = (j+1)^{−β}` of the sufficient quantity.
    pub fn sufficient_terms(&self) -> Vec<f64> {
        (0..=self.params.depth).map(|j| ((j + 1) as f64).powf(-self.params.beta)).collect()
    }

    /// Terms `(ω(E_j)/ω(P_j)) (λ_{P_j}^q ω(P_j))^α` of the lower bound for
    /// the unnecessary condition.
    pub fn divergent_terms(&self) -> Vec<f64> {
        let ab = self.alpha * self.params.beta;
        (0..=self.params.depth).map(|j| Self::annulus_share(j) * ((j + 1) as f64).powf(-ab)).collect()
    }

    /// Both sides of the telescoping lower estimate at depth `N`:
    /// `Σ_{j<N} (ω(E_{j+1})/ω(P_j)) b_j^α` and `log ω(P_N) · b_N^α − log ω(E₀) · b₀`
    /// with `b_j = (j+1)^{−β}`.
    pub fn lower_estimate(&self) -> (f64, f64) {
        let n = self.params.depth;
        let ab = self.alpha * self.params.beta;
        let lhs: f64 = (0..n).map(|j| ((j + 1) as f64).powf(-ab) / (1.0 - 0.5f64.powi((j + 1).min(1100) as i32))).sum();
        let log_omega_pn = (n as f64 + 2.0) * std::f64::consts::LN_2 + (-(0.5f64.powi((n + 1).min(1100) as i32))).ln_1p();
        let rhs = log_omega_pn * ((n + 1) as f64).powf(-ab) - 2f64.ln();
        (lhs, rhs)
    }

    /// The chain along the ancestors of the leftmost leaf of a binary tree of
    /// depth `N`.
    pub fn instance(&self) -> Result<Instance> {
        let LargeGammaParams { p, q, depth: n, beta } = self.params;
        let tree = DyadicTree::with_cap(2, n, MATERIALIZE_NODE_CAP)?;
        let mut lambda = vec![0.0; tree.node_count()];
        let mut sigma = vec![0.0; tree.leaf_count()];
        let mut omega = vec![0.0; tree.leaf_count()];
        sigma[0] = 1.0;
        omega[0] = 2.0;
        for j in 1..=n {
            omega[1usize << (j - 1)] = 2f64.powi(j as i32 + 1);
        }
        for j in 0..=n {
            let omega_p = 2f64.powi(j as i32 + 2) - 2.0;
            lambda[(1usize << (n - j)) - 1] = (((j + 1) as f64).powf(-beta) / omega_p).powf(1.0 / q);
        }
        Instance::new(tree, lambda, &sigma, &omega, Exponents::new(p, q, q)?)
    }

    pub fn report(&self) -> LargeGammaReport {
        let LargeGammaParams { depth, beta, .. } = self.params;
        let suff = prefix(&self.sufficient_terms());
        let div = prefix(&self.divergent_terms());
        let (lower_lhs, lower_rhs) = self.lower_estimate();
        let k = (depth / 1000).max(2);
        LargeGammaReport {
            params: self.params,
            alpha: self.alpha,
            sufficient_total: suff[depth],
            sufficient_tail: suff[depth] - suff[k - 1],
            sufficient_tail_from: k,
            sufficient_tail_bound: (beta - 1.0).recip() * (k as f64).powf(1.0 - beta),
            divergent: trend(&div, Verdict::Diverges),
            expected_slope: 1.0 - self.alpha * beta,
            lower_estimate_lhs: lower_lhs,
            lower_estimate_rhs: lower_rhs,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LargeGammaReport {
    pub params: LargeGammaParams,
    pub alpha: f64,
    pub sufficient_total: f64,
    /// `Σ_{k≤j≤N} (j+1)^{−β}`.
    pub sufficient_tail: f64,
    pub sufficient_tail_from: usize,
    /// `(β−1)^{−1} k^{1−β}`.
    pub sufficient_tail_bound: f64,
    pub divergent: GrowthTrend,
    pub expected_slope: f64,
    pub lower_estimate_lhs: f64,
    pub lower_estimate_rhs: f64,
}

/// `∫ sup_Q λ_Q^{(p−1)q/(p−q)} (ω(Q)/σ(Q))^{q/(p−q)} Λ_{q,Q}^{q/(p−q)} 1_Q dω`.
pub fn endpoint_sup_condition(inst: &Instance) -> f64 {
    let Exponents { p, q, .. } = inst.exponents;
    let t = &inst.tree;
    let lq = crate::wolff::lambda_gamma_all(inst, q);
    let lam = inst.lambda_active();
    let (s, w) = (inst.sigma(), inst.omega());
    let node: Vec<f64> = (0..t.node_count())
        .map(|k| if lam[k] > 0.0 { lam[k].powf((p - 1.0) * q / (p - q)) * (w[k] / s[k] * lq[k]).powf(q / (p - q)) } else { 0.0 })
        .collect();
    let sup = t.ancestor_max(&node);
    inst.integrate(t.leaves(&sup), crate::tree::Side::Omega)
}

/// `sup_Q σ(Q)^{−q/p} ∫ ρ_Q^q dω` over the active collection.
pub fn necessary_condition(inst: &Instance) -> f64 {
    let Exponents { p, q, .. } = inst.exponents;
    let t = &inst.tree;
    let w = inst.omega_leaves();
    inst.active_collection()
        .into_iter()
        .map(|k| {
            let rho = inst.localized_sum(k);
            let int: f64 = rho.iter().zip(&w[t.leaf_range(k)]).map(|(r, m)| r.powf(q) * m).sum();
            int / inst.sigma()[k].powf(q / p)
        })
        .fold(0.0, f64::max)
}

/// `λ_Q = σ(Q) |Q|^{α/d − 1}` with `|Q| = 2^{−kd}` at level `k`, for a tree of
/// branching `2^d`.
pub fn riesz_model_coefficients(tree: &DyadicTree, sigma_leaves: &[f64], alpha: f64) -> Result<Vec<f64>> {
    let b = tree.branching();
    if !b.is_power_of_two() || b < 2 {
        return param(format!("branching must be 2^d with d ≥ 1, got {b}"));
    }
    let d = b.trailing_zeros() as f64;
    if !(alpha > 0.0 && alpha < d) {
        return param(format!("α must lie in (0, {d}), got {alpha}"));
    }
    if sigma_leaves.len() != tree.leaf_count() {
        return Err(Error::Parameter(format!("σ has {} leaves, tree has {}", sigma_leaves.len(), tree.leaf_count())));
    }
    let sigma = tree.aggregate(sigma_leaves);
    Ok((0..tree.node_count())
        .map(|q| {
            let k = tree.level(q) as f64;
            sigma[q] * 2f64.powf(-k * d * (alpha / d - 1.0))
        })
        .collect())
}
