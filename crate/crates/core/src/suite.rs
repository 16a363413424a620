//! Seeded verification suites and the worker pool that runs them.
//!
//! Every case draws its instance from its own ChaCha stream, so a report is
//! the same for any worker count. Observed comparability constants are kept
//! as maxima keyed by quantity and exponents.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::characterize::{
    construct_a_from_d, construct_d_from_a, density_mass, factorization_bound_value, littlewood_paley_split,
    maurey_discretize, maurey_undiscretize, minimize_upper_bound, quantities_a, quantities_d, wolff_pair,
    wolff_variant,
};
use crate::counterexamples::{
    classify_series, LargeGammaChain, LargeGammaParams, SmallGammaChain, SmallGammaParams, Verdict,
};
use crate::error::{Error, Result};
use crate::io::{instance_to_value, RunReport};
use crate::lp::{equivalent_expressions_ratio, f_norm_scaling_check, summation_by_parts_ratio};
use crate::operator::{estimate_norm, sum_side, sup_side, transform_a_to_b, transform_b_to_a, NormOptions};
use crate::random::{random_instance, RandomShape};
use crate::tree::{Exponents, Instance, Side};
use crate::wolff::{lambda_gamma_all, lambda_one, power_mean, wolff_potential};

pub const WORKERS_ENV: &str = "TWOWEIGHT_WORKERS";

pub const GAMMA_LADDER: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];
pub const P_GRID: [f64; 3] = [1.5, 2.0, 3.0];
pub const Q_GRID: [f64; 3] = [0.25, 0.5, 0.75];

/// Largest admissible two-sided constant between the minimized upper bound
/// and the estimated norm.
pub const SANDWICH_LIMIT: f64 = 50.0;
/// Largest admissible `estimate_norm / factorization bound`.
pub const FACTORIZATION_LIMIT: f64 = 4.0;
/// Largest admissible constant in the `a ↔ d` power relations.
pub const CONTRACT_LIMIT: f64 = 20.0;
/// Largest admissible `∫Φ′ dω / ∫Φ dω` after a discretization round trip.
pub const MAUREY_LIMIT: f64 = 20.0;
pub const EXACT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteName {
    Invariants,
    Sandwich,
    WolffScale,
    Counterexamples,
}

impl std::str::FromStr for SuiteName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "invariants" => Self::Invariants,
            "sandwich" => Self::Sandwich,
            "wolff-scale" => Self::WolffScale,
            "counterexamples" => Self::Counterexamples,
            _ => return Err(Error::Parameter(format!("unknown suite {s:?}"))),
        })
    }
}

impl std::fmt::Display for SuiteName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Invariants => "invariants",
            Self::Sandwich => "sandwich",
            Self::WolffScale => "wolff-scale",
            Self::Counterexamples => "counterexamples",
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Instances (per grid point for `sandwich`).
    pub count: usize,
    pub max_depth: usize,
    /// Chain depths for `counterexamples`.
    pub sizes: Vec<usize>,
    #[serde(skip)]
    pub workers: usize,
}

impl SuiteConfig {
    pub fn new(name: SuiteName, seed: u64) -> Self {
        let (count, max_depth) = match name {
            SuiteName::Invariants => (200, 3),
            SuiteName::Sandwich => (30, 3),
            SuiteName::WolffScale => (100, 5),
            SuiteName::Counterexamples => (0, 0),
        };
        Self { seed, count, max_depth, sizes: vec![1_000_000], workers: workers_from_env() }
    }
}

/// Worker count from `TWOWEIGHT_WORKERS`, else the available parallelism.
pub fn workers_from_env() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Evaluate `f(0..count)` on a scoped pool; results come back in index order.
pub fn run_indexed<T, F>(count: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let workers = workers.clamp(1, count.max(1));
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<T>>> = Mutex::new((0..count).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= count {
                    break;
                }
                let out = f(i);
                slots.lock().expect("no poisoned workers")[i] = Some(out);
            });
        }
    });
    slots.into_inner().expect("no poisoned workers").into_iter().map(|s| s.expect("every slot filled")).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub observed: f64,
    pub limit: f64,
}

impl Check {
    /// Passes when `observed ≤ limit`.
    pub fn at_most(name: impl Into<String>, observed: f64, limit: f64) -> Self {
        Self { name: name.into(), passed: observed <= limit, observed, limit }
    }

    /// Passes when `observed ≥ limit`.
    pub fn at_least(name: impl Into<String>, observed: f64, limit: f64) -> Self {
        Self { name: name.into(), passed: observed >= limit, observed, limit }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Case {
    pub checks: Vec<Check>,
    pub constants: BTreeMap<String, f64>,
    #[serde(skip)]
    pub instance: Option<Value>,
}

impl Case {
    fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    fn constant(&mut self, key: String, v: f64) {
        let e = self.constants.entry(key).or_insert(v);
        *e = e.max(v);
    }

    fn error(&mut self, name: &str, e: Error) {
        self.checks.push(Check { name: format!("{name}: {e}"), passed: false, observed: f64::NAN, limit: f64::NAN });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub index: usize,
    pub check: Check,
    pub instance: Option<Value>,
}

#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub report: RunReport,
    pub failures: Vec<Failure>,
}

fn case_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn max_rel_err(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| rel_err(x, y)).fold(0.0, f64::max)
}

fn positive_family(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(0.1f64..10.0)).collect()
}

fn pq_key(name: &str, e: &Exponents) -> String {
    format!("{name}/p={},q={}", e.p, e.q)
}

fn draw_instance(rng: &mut ChaCha8Rng, max_depth: usize, e: Exponents) -> Result<Instance> {
    let depth = rng.gen_range(1..=max_depth.max(1));
    random_instance(rng, RandomShape { depth, ..Default::default() }, e)
}

/// Leafwise `sup a 1_Q = Σ b 1_Q` and `Σ λ a 1_Q` vs `Σ ρ b 1_Q` for both
/// directions of the `a ↔ b` transforms. Returns
/// `(b→a identity error, a→b sup error, a→b domination excess)`.
pub fn domination_errors(inst: &Instance, a: &[f64], b: &[f64]) -> (f64, f64, f64) {
    let a_from_b = transform_b_to_a(inst, b);
    let (la, sup) = sup_side(inst, &a_from_b);
    let (rb, sb) = sum_side(inst, b);
    let first = max_rel_err(&la, &rb).max(max_rel_err(&sup, &sb));
    let b_from_a = transform_a_to_b(inst, a);
    let (la, sup) = sup_side(inst, a);
    let (rb, sb) = sum_side(inst, &b_from_a);
    let second = max_rel_err(&sup, &sb);
    let excess = la.iter().zip(&rb).map(|(&l, &r)| if l > r { rel_err(l, r) } else { 0.0 }).fold(0.0, f64::max);
    (first, second, excess)
}

/// Pairwise brackets of the summation-by-parts and equivalent-expression
/// families: `(sbp_low, sbp_high, equiv_low, equiv_high)` over `count` random
/// instances of fixed depth. The `equiv` pair is `(1, 1)` for `p ≤ 1`.
pub fn comparability_brackets(seed: u64, count: usize, depth: usize, p: f64, workers: usize) -> Result<(f64, f64, f64, f64)> {
    let per = run_indexed(count, workers, |i| -> Result<(f64, f64, f64, f64)> {
        let mut rng = case_rng(seed, i);
        let inst = random_instance(&mut rng, RandomShape { depth, ..Default::default() }, Exponents::default())?;
        let a = positive_family(&mut rng, inst.tree.node_count());
        let side = if i % 2 == 0 { Side::Omega } else { Side::Sigma };
        let (sl, sh) = summation_by_parts_ratio(&inst, &a, p, side)?;
        let (el, eh) = if p > 1.0 { equivalent_expressions_ratio(&inst, &a, p, side)? } else { (1.0, 1.0) };
        Ok((sl, sh, el, eh))
    });
    let mut out = (f64::INFINITY, 0.0f64, f64::INFINITY, 0.0f64);
    for r in per {
        let (a, b, c, d) = r?;
        out = (out.0.min(a), out.1.max(b), out.2.min(c), out.3.max(d));
    }
    Ok(out)
}

/// Instance-independent cap on the comparability brackets for exponent `p`.
pub fn bracket_limit(p: f64) -> f64 {
    2f64.powf((p - 1.0).abs() + 1.0)
}

fn invariants_case(seed: u64, index: usize, max_depth: usize) -> Case {
    let mut case = Case::default();
    let mut rng = case_rng(seed, index);
    let ps = [1.0, 1.5, 2.0, 3.0];
    let e = Exponents::new(ps[index % 4], Q_GRID[(index / 4) % 3], 1.0).expect("grid exponents");
    let inst = match draw_instance(&mut rng, max_depth, e) {
        Ok(i) => i,
        Err(err) => {
            case.error("instance", err);
            return case;
        }
    };
    case.instance = Some(instance_to_value(&inst));
    if let Err(err) = invariant_checks(&mut case, &inst, &mut rng) {
        case.error("evaluation", err);
    }
    case
}

fn invariant_checks(case: &mut Case, inst: &Instance, rng: &mut ChaCha8Rng) -> Result<()> {
    let t = &inst.tree;
    let n = t.node_count();
    let e = inst.exponents;
    let (p, q) = (e.p, e.q);

    let additive = (0..t.first_leaf()).all(|k| {
        let s: f64 = t.children(k).map(|c| inst.sigma()[c]).sum();
        let w: f64 = t.children(k).map(|c| inst.omega()[c]).sum();
        s == inst.sigma()[k] && w == inst.omega()[k]
    });
    case.check(Check::at_least("measure additivity", additive as u8 as f64, 1.0));

    let a = positive_family(rng, n);
    let (r, s, tt) = (rng.gen_range(0.5..4.0), rng.gen_range(0.5..4.0), rng.gen_range(0.25..3.0));
    let scaling = f_norm_scaling_check(inst, &a, r, s, tt, Side::Sigma)?;
    case.check(Check::at_most("f-norm power scaling", if inst.active_count() == 0 { 0.0 } else { (scaling - 1.0).abs() }, EXACT_TOL));

    let b = positive_family(rng, n);
    let (d1, d2, excess) = domination_errors(inst, &a, &b);
    case.check(Check::at_most("domination b→a identity", d1, EXACT_TOL));
    case.check(Check::at_most("domination a→b sup identity", d2, EXACT_TOL));
    case.check(Check::at_most("domination a→b inequality", excess, EXACT_TOL));

    let fast = lambda_one(inst);
    let w = inst.omega_leaves();
    let slow: Vec<f64> =
        (0..n).map(|k| if inst.omega()[k] > 0.0 { power_mean(&inst.localized_sum(k), &w[t.leaf_range(k)], 1.0) } else { 0.0 }).collect();
    case.check(Check::at_most("gamma-one inner sum identity", max_rel_err(&fast, &slow), EXACT_TOL));

    jensen_checks(case, inst)?;

    let sbp = summation_by_parts_ratio(inst, &a, p, Side::Omega)?;
    case.constant(format!("sbp_high/p={p}"), sbp.1);
    case.constant(format!("sbp_low_inv/p={p}"), 1.0 / sbp.0);
    case.check(Check::at_most("summation-by-parts bracket", sbp.1.max(1.0 / sbp.0), bracket_limit(p)));
    if p > 1.0 {
        let eq = equivalent_expressions_ratio(inst, &a, p, Side::Omega)?;
        case.constant(format!("equivalent_high/p={p}"), eq.1);
        case.constant(format!("equivalent_low_inv/p={p}"), 1.0 / eq.0);
        case.check(Check::at_most("equivalent-expressions bracket", eq.1.max(1.0 / eq.0), bracket_limit(p)));
        contract_checks(case, inst, &a, &b)?;
    }

    let phi: Vec<f64> = positive_family(rng, t.leaf_count());
    let am = maurey_discretize(inst, &phi)?;
    let phi2 = maurey_undiscretize(inst, &am)?;
    let before = inst.integrate(&phi, Side::Omega);
    let after = inst.integrate(&phi2, Side::Omega);
    let ratio = if before > 0.0 { after / before } else { 0.0 };
    case.constant(format!("maurey/q={q}"), ratio);
    case.check(Check::at_most("maurey round trip", ratio, MAUREY_LIMIT));
    if inst.active_count() > 0 {
        let (_, a2) = quantities_a(inst, &a)?;
        let phi_a = maurey_undiscretize(inst, &a)?;
        let mass = inst.integrate(&phi_a, Side::Omega);
        case.check(Check::at_most("density mass identity", rel_err(a2.powf(q / (1.0 - q)), mass), EXACT_TOL));
        case.check(Check::at_most("density mass helper", rel_err(density_mass(inst, &a), mass), EXACT_TOL));
    }
    Ok(())
}

/// `Λ_{γ₁,Q} ≤ Λ_{γ₂,Q}` along the γ ladder and, for `p > 1`, pointwise
/// monotonicity of the generalized potential in `γ`.
fn jensen_checks(case: &mut Case, inst: &Instance) -> Result<()> {
    let ladder: Vec<Vec<f64>> = GAMMA_LADDER.iter().map(|&g| lambda_gamma_all(inst, g)).collect();
    let worst = ladder
        .windows(2)
        .flat_map(|w| w[0].iter().zip(&w[1]).map(|(&lo, &hi)| lo - hi - EXACT_TOL * hi.abs()))
        .fold(f64::NEG_INFINITY, f64::max);
    case.check(Check::at_most("jensen monotonicity", worst, EXACT_TOL));
    if inst.exponents.p > 1.0 {
        let pots: Vec<Vec<f64>> = GAMMA_LADDER.iter().map(|&g| wolff_potential(inst, g)).collect::<Result<_>>()?;
        let worst = pots
            .windows(2)
            .flat_map(|w| w[0].iter().zip(&w[1]).map(|(&lo, &hi)| lo - hi - EXACT_TOL * hi.abs()))
            .fold(f64::NEG_INFINITY, f64::max);
        case.check(Check::at_most("potential monotonicity", worst, EXACT_TOL));
    }
    Ok(())
}

/// The four `a ↔ d` power relations. Returns the observed constants.
pub fn contract_constants(inst: &Instance, a: &[f64], d: &[f64]) -> Result<[f64; 4]> {
    let Exponents { p, q, .. } = inst.exponents;
    if inst.active_count() == 0 {
        return Ok([0.0; 4]);
    }
    let built_d = construct_d_from_a(inst, a)?;
    let (dd1, dd2) = quantities_d(inst, &built_d)?;
    let (a1, a2) = quantities_a(inst, a)?;
    let c_d2 = dd2 / (a1.powf(p) * a2.powf(p));
    let built_a = construct_a_from_d(inst, d)?;
    let (d1, d2) = quantities_d(inst, d)?;
    let (ba1, ba2) = quantities_a(inst, &built_a)?;
    let c_a1 = ba1 / (d1.powf(1.0 / p) * d2.powf((p - 1.0) * q / (p * (p - q))));
    let c_a2 = ba2 / d2.powf((1.0 - q) / (p - q));
    Ok([dd1, c_d2, c_a1, c_a2])
}

fn contract_checks(case: &mut Case, inst: &Instance, a: &[f64], d: &[f64]) -> Result<()> {
    let names = ["contract_d1", "contract_d2", "contract_a1", "contract_a2"];
    for (name, c) in names.iter().zip(contract_constants(inst, a, d)?) {
        case.constant(pq_key(name, &inst.exponents), c);
        case.check(Check::at_most(*name, c, CONTRACT_LIMIT));
    }
    Ok(())
}

fn sandwich_case(seed: u64, index: usize, count: usize, max_depth: usize) -> Case {
    let mut case = Case::default();
    let grid = index / count.max(1);
    let e = Exponents::new(P_GRID[grid / 3], Q_GRID[grid % 3], 1.0).expect("grid exponents");
    let mut rng = case_rng(seed, index);
    let inst = match draw_instance(&mut rng, max_depth, e) {
        Ok(i) => i,
        Err(err) => {
            case.error("instance", err);
            return case;
        }
    };
    case.instance = Some(instance_to_value(&inst));
    if let Err(err) = sandwich_checks(&mut case, &inst, &mut rng) {
        case.error("evaluation", err);
    }
    case
}

/// `(max(bound/norm, norm/bound), norm/factorization bound, worst norm/random factorization)`.
pub fn sandwich_constants(inst: &Instance, rng: &mut ChaCha8Rng, random_factorizations: usize) -> Result<(f64, f64, f64)> {
    let norm = estimate_norm(inst, NormOptions::default())?.value;
    if inst.active_count() == 0 {
        return Ok((1.0, 0.0, 0.0));
    }
    let ub = minimize_upper_bound(inst, None)?.value;
    let sandwich = (ub / norm).max(norm / ub);
    let (b, c) = littlewood_paley_split(inst)?;
    let split = norm / factorization_bound_value(inst, &b, &c)?;
    let lam = inst.lambda_active().to_vec();
    let mut random = 0.0f64;
    for _ in 0..random_factorizations {
        let b = positive_family(rng, lam.len());
        let c: Vec<f64> = lam.iter().zip(&b).map(|(l, b)| l / b).collect();
        random = random.max(norm / factorization_bound_value(inst, &b, &c)?);
    }
    Ok((sandwich, split, random))
}

fn sandwich_checks(case: &mut Case, inst: &Instance, rng: &mut ChaCha8Rng) -> Result<()> {
    let (sandwich, split, random) = sandwich_constants(inst, rng, 5)?;
    let e = inst.exponents;
    case.constant(pq_key("sandwich", &e), sandwich);
    case.constant(format!("factorization/q={}", e.q), split.max(random));
    case.check(Check::at_most("upper bound sandwich", sandwich, SANDWICH_LIMIT));
    case.check(Check::at_most("split factorization", split, FACTORIZATION_LIMIT));
    case.check(Check::at_most("random factorizations", random, FACTORIZATION_LIMIT));
    Ok(())
}

fn wolff_case(seed: u64, index: usize, max_depth: usize) -> Case {
    let mut case = Case::default();
    let mut rng = case_rng(seed, index);
    let e = Exponents::new(P_GRID[index % 3], Q_GRID[(index / 3) % 3], 1.0).expect("grid exponents");
    let inst = match draw_instance(&mut rng, max_depth, e) {
        Ok(i) => i,
        Err(err) => {
            case.error("instance", err);
            return case;
        }
    };
    case.instance = Some(instance_to_value(&inst));
    let run = |case: &mut Case| -> Result<()> {
        jensen_checks(case, &inst)?;
        for g in GAMMA_LADDER {
            let v = wolff_variant(&inst, g)?;
            let limit = 1f64.max(1.0 / g) * (1.0 + EXACT_TOL);
            case.constant(format!("variant_carleson/gamma={g}"), v.carleson);
            case.check(Check::at_most(format!("variant carleson gamma={g}"), v.carleson, limit));
        }
        let pair = wolff_pair(&inst)?;
        case.check(Check::at_most("pair first condition", pair.ca, 1.0 + EXACT_TOL));
        case.constant("dlbo".into(), crate::wolff::dlbo_ratio(&inst));
        Ok(())
    };
    if let Err(err) = run(&mut case) {
        case.error("evaluation", err);
    }
    case
}

fn partial_sums(terms: &[f64]) -> Vec<f64> {
    let mut s = 0.0;
    terms
        .iter()
        .map(|t| {
            s += t;
            s
        })
        .collect()
}

/// The verdict checks for the ascending (large γ) chain at depth `n ≥ 2000`
/// with `p = 2`, `q = 1/2`, `β = 5/4`.
pub fn large_gamma_checks(n: usize) -> Result<(Vec<Check>, Value)> {
    let chain = LargeGammaChain::new(LargeGammaParams { p: 2.0, q: 0.5, depth: n, beta: 1.25 })?;
    let report = chain.report();
    let k = n / 1000;
    let div = partial_sums(&chain.divergent_terms());
    let checks = vec![
        Check::at_most("sufficient tail below bound", report.sufficient_tail, report.sufficient_tail_bound),
        Check::at_least("divergent growth factor", div[n] / div[k], 2.0),
        Check::at_most("divergent slope error", (report.divergent.slope - report.expected_slope).abs(), 0.03),
        Check::at_least("telescoping lower estimate", report.lower_estimate_lhs - report.lower_estimate_rhs, 0.0),
    ];
    Ok((checks, serde_json::to_value(report)?))
}

/// The verdict checks for the descending (small γ) chain at depth `n ≥ 2000`
/// with `p = 2`, `q = 1/2`, `γ = 1/4`, `ε = 1/2`.
pub fn small_gamma_checks(n: usize) -> Result<(Vec<Check>, Value)> {
    let chain = SmallGammaChain::new(SmallGammaParams { p: 2.0, q: 0.5, gamma: 0.25, depth: n, epsilon: 0.5, alpha: 1.0 })?;
    let k = n / 1000;
    let nec_terms = chain.necessary_terms();
    let nec = partial_sums(&nec_terms);
    let min_term = nec_terms[1..].iter().copied().fold(f64::INFINITY, f64::min);
    let wolff_terms = chain.wolff_terms();
    let wolff = partial_sums(&wolff_terms);
    let majorant = chain.wolff_majorant();
    let class = classify_series(majorant, k as u64);
    let unit = |j: usize| ((j + 1) as f64).recip() * ((j + 2) as f64).ln().powf(-majorant.b);
    let ratio = (k..=n).map(|j| wolff_terms[j] / unit(j)).fold(0.0, f64::max);
    let certified = class.tail_bound.unwrap_or(f64::INFINITY) / majorant.coefficient * ratio;
    let mut shrinking = 0.0f64;
    let mut j = 16;
    let mut prev = f64::INFINITY;
    while 2 * j <= n {
        let inc = wolff[2 * j] - wolff[j];
        shrinking = shrinking.max(inc - prev);
        prev = inc;
        j *= 2;
    }
    let checks = vec![
        Check::at_least("necessary terms positive", min_term, f64::MIN_POSITIVE),
        Check::at_least("necessary increment", nec[n] - nec[k], 0.1 * nec[k]),
        Check::at_least(
            "wolff majorant convergent",
            (class.verdict == Verdict::Converges && majorant.a == 0.0 && majorant.b > 1.0) as u8 as f64,
            1.0,
        ),
        Check::at_most("wolff tail within certified bound", wolff[n] - wolff[k], certified),
        Check::at_most("wolff dyadic increments shrink", shrinking, 0.0),
    ];
    let info = json!({
        "report": chain.report(),
        "necessary_partial": {"k": k, "s_k": nec[k], "s_n": nec[n]},
        "wolff_partial": {"k": k, "s_k": wolff[k], "s_n": wolff[n]},
        "wolff_term_to_majorant": ratio,
        "wolff_certified_tail": certified,
    });
    Ok((checks, info))
}

fn counterexample_case(sizes: &[usize], index: usize) -> Case {
    let mut case = Case::default();
    let n = sizes[index / 2];
    let (label, res) = if index.is_multiple_of(2) {
        ("large-gamma", large_gamma_checks(n))
    } else {
        ("small-gamma", small_gamma_checks(n))
    };
    case.instance = Some(json!({"chain": label, "depth": n}));
    match res {
        Ok((checks, _)) => {
            for mut c in checks {
                c.name = format!("{label} N={n}: {}", c.name);
                case.check(c);
            }
        }
        Err(e) => case.error(label, e),
    }
    case
}

/// Run one suite. The report's `passed` flag is false iff some check failed;
/// the failing cases are returned alongside for dumping.
pub fn run_suite(name: SuiteName, cfg: &SuiteConfig) -> Result<SuiteOutcome> {
    let start = Instant::now();
    if name != SuiteName::Counterexamples && cfg.count == 0 {
        return Err(Error::Parameter("suite needs at least one instance".into()));
    }
    if let Some(&n) = cfg.sizes.iter().find(|&&n| n < 2000) {
        if name == SuiteName::Counterexamples {
            return Err(Error::Parameter(format!("chain depths must be at least 2000, got {n}")));
        }
    }
    let cases = match name {
        SuiteName::Invariants => run_indexed(cfg.count, cfg.workers, |i| invariants_case(cfg.seed, i, cfg.max_depth)),
        SuiteName::Sandwich => {
            run_indexed(cfg.count * 9, cfg.workers, |i| sandwich_case(cfg.seed, i, cfg.count, cfg.max_depth))
        }
        SuiteName::WolffScale => run_indexed(cfg.count, cfg.workers, |i| wolff_case(cfg.seed, i, cfg.max_depth)),
        SuiteName::Counterexamples => run_indexed(cfg.sizes.len() * 2, cfg.workers, |i| counterexample_case(&cfg.sizes, i)),
    };
    let mut constants: BTreeMap<String, f64> = BTreeMap::new();
    let mut failures = Vec::new();
    let mut checks = 0usize;
    let mut digests = Vec::new();
    for (index, case) in cases.iter().enumerate() {
        for (k, &v) in &case.constants {
            let e = constants.entry(k.clone()).or_insert(v);
            *e = e.max(v);
        }
        checks += case.checks.len();
        for c in case.checks.iter().filter(|c| !c.passed) {
            failures.push(Failure { index, check: c.clone(), instance: case.instance.clone() });
        }
        if let Some(v) = &case.instance {
            digests.push(v.to_string());
        }
    }
    let results = json!({
        "suite": name,
        "config": cfg,
        "cases": cases.len(),
        "checks": checks,
        "failed_checks": failures.len(),
        "failures": failures.iter().map(|f| json!({"index": f.index, "check": f.check})).collect::<Vec<_>>(),
    });
    let command = vec!["verify".to_string(), name.to_string(), format!("--seed={}", cfg.seed)];
    let mut report = RunReport::new(command, None, results);
    report.constants = constants;
    report.passed = failures.is_empty();
    report.instance_digest = Some(crate::io::sha256_hex(digests.join("\n").as_bytes()));
    report.wall_time_s = start.elapsed().as_secs_f64();
    report.rehash();
    Ok(SuiteOutcome { report, failures })
}

/// Write each failing case to `dir/<suite>-case-<index>.json`.
pub fn write_reproducers(name: SuiteName, failures: &[Failure], dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = BTreeMap::new();
    for f in failures {
        let path = dir.join(format!("{name}-case-{}.json", f.index));
        let entry = written.entry(f.index).or_insert_with(|| (path, f.instance.clone(), Vec::new()));
        entry.2.push(f.check.clone());
    }
    let mut out = Vec::new();
    for (index, (path, instance, checks)) in written {
        let body = json!({"suite": name, "index": index, "failed": checks, "instance": instance});
        std::fs::write(&path, serde_json::to_string_pretty(&body)? + "\n")?;
        out.push(path);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pool_preserves_order() {
        let out = run_indexed(100, 7, |i| i * i);
        assert_eq!(out, (0..100).map(|i| i * i).collect::<Vec<_>>());
        assert!(run_indexed(0, 4, |i| i).is_empty());
    }

    #[test]
    fn suite_names_round_trip() {
        for s in ["invariants", "sandwich", "wolff-scale", "counterexamples"] {
            assert_eq!(s.parse::<SuiteName>().unwrap().to_string(), s);
        }
        assert!("other".parse::<SuiteName>().is_err());
    }

    #[test]
    fn small_invariants_run_is_worker_independent() {
        let mut cfg = SuiteConfig::new(SuiteName::Invariants, 7);
        cfg.count = 12;
        cfg.workers = 1;
        let a = run_suite(SuiteName::Invariants, &cfg).unwrap();
        cfg.workers = 4;
        let b = run_suite(SuiteName::Invariants, &cfg).unwrap();
        assert!(a.report.passed, "{:?}", a.failures);
        assert_eq!(a.report.hash, b.report.hash);
    }

    #[test]
    fn reproducers_are_written() {
        let dir = std::env::temp_dir().join(format!("twoweight-repro-{}", std::process::id()));
        let f = Failure { index: 3, check: Check::at_most("x", 2.0, 1.0), instance: Some(json!({"depth": 0})) };
        let paths = write_reproducers(SuiteName::Sandwich, &[f.clone(), f], &dir).unwrap();
        assert_eq!(paths.len(), 1);
        let body: Value = serde_json::from_str(&std::fs::read_to_string(&paths[0]).unwrap()).unwrap();
        assert_eq!(body["failed"].as_array().unwrap().len(), 2);
        std::fs::remove_dir_all(dir).unwrap();
    }
}
