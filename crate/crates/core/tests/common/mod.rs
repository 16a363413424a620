#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twoweight::Instance;

/// `‖T(fσ)‖_{L^q(ω)} / ‖f‖_{L^p(σ)}` evaluated leaf by leaf, without the
/// library's tree sweeps.
pub fn direct_ratio(inst: &Instance, f: &[f64]) -> f64 {
    let t = &inst.tree;
    let (p, q) = (inst.exponents.p, inst.exponents.q);
    let s = inst.sigma_leaves();
    let w = inst.omega_leaves();
    let lam = inst.lambda();
    let mut tf = vec![0.0; t.leaf_count()];
    for node in 0..t.node_count() {
        let range = t.leaf_range(node);
        let smass: f64 = range.clone().map(|x| s[x]).sum();
        let wmass: f64 = range.clone().map(|x| w[x]).sum();
        if lam[node] == 0.0 || smass == 0.0 || wmass == 0.0 {
            continue;
        }
        let avg = range.clone().map(|x| f[x] * s[x]).sum::<f64>() / smass;
        for x in range {
            tf[x] += lam[node] * avg;
        }
    }
    let num = tf.iter().zip(w).map(|(v, m)| v.powf(q) * m).sum::<f64>().powf(1.0 / q);
    let den = f.iter().zip(s).map(|(v, m)| v.powf(p) * m).sum::<f64>().powf(1.0 / p);
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Brute-force lower estimate of the norm: `directions` random points of the
/// positive unit sphere, then a pattern search in `f = u²` from the best one.
pub fn oracle_norm(inst: &Instance, directions: usize, seed: u64) -> f64 {
    let l = inst.tree.leaf_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eval = |u: &[f64]| direct_ratio(inst, &u.iter().map(|x| x * x).collect::<Vec<_>>());
    let mut best_u = vec![1.0; l];
    let mut best = eval(&best_u);
    for _ in 0..directions {
        let u: Vec<f64> = (0..l).map(|_| rng.gen_range(0.0f64..1.0)).collect();
        let v = eval(&u);
        if v > best {
            best = v;
            best_u = u;
        }
    }
    let norm = best_u.iter().map(|x| x * x).sum::<f64>().sqrt();
    best_u.iter_mut().for_each(|x| *x /= norm);
    let mut h = 0.25;
    while h > 1e-9 {
        let mut improved = false;
        for i in 0..l {
            for dir in [1.0, -1.0] {
                let mut u = best_u.clone();
                u[i] = (u[i] + dir * h).max(0.0);
                let v = eval(&u);
                if v > best * (1.0 + 1e-15) {
                    best = v;
                    best_u = u;
                    improved = true;
                }
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    best
}
