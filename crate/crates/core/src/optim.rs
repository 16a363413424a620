//! Small numerical helpers shared by the estimators.

/// Euclidean projection onto the probability simplex `{x ≥ 0, Σx = 1}`.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    let mut css = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        css += uj;
        let t = (css - 1.0) / (j as f64 + 1.0);
        if uj - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Outcome of a local ascent.
#[derive(Debug, Clone)]
pub struct Ascent {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Gradient ascent with central finite differences and step halving.
///
/// Stops when an accepted step improves the objective by less than
/// `tol · (1 + |f|)` or when no step of size above `1e-14` improves it.
pub fn fd_ascent(f: &dyn Fn(&[f64]) -> f64, x0: Vec<f64>, max_iter: usize, tol: f64) -> Ascent {
    let n = x0.len();
    let mut x = x0;
    let mut fx = f(&x);
    let mut step: f64 = 1.0;
    let mut grad = vec![0.0; n];
    for it in 0..max_iter {
        for i in 0..n {
            let h = 1e-6 * (1.0 + x[i].abs());
            let mut y = x.clone();
            y[i] = x[i] + h;
            let fp = f(&y);
            y[i] = x[i] - h;
            let fm = f(&y);
            grad[i] = if fp.is_finite() && fm.is_finite() { (fp - fm) / (2.0 * h) } else { 0.0 };
        }
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if gnorm == 0.0 || !gnorm.is_finite() {
            return Ascent { x, value: fx, iterations: it, converged: true };
        }
        step = (step * 2.0).min(1e3);
        loop {
            let y: Vec<f64> = x.iter().zip(&grad).map(|(a, g)| a + step * g / gnorm).collect();
            let fy = f(&y);
            if fy.is_finite() && fy > fx {
                let gain = fy - fx;
                x = y;
                fx = fy;
                if gain < tol * (1.0 + fx.abs()) {
                    return Ascent { x, value: fx, iterations: it + 1, converged: true };
                }
                break;
            }
            step *= 0.5;
            if step < 1e-14 {
                return Ascent { x, value: fx, iterations: it + 1, converged: true };
            }
        }
    }
    Ascent { x, value: fx, iterations: max_iter, converged: false }
}

/// Minimize a unimodal-ish function on `[lo, hi]` by golden-section search.
pub fn golden_min(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - r * (hi - lo);
    let mut d = lo + r * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - r * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + r * (hi - lo);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Coordinate descent for `min f` with a golden-section line search per
/// coordinate. The search window around each coordinate starts at `±4` and
/// shrinks with the coordinate's last move. Stops after `sweeps` passes or when
/// a pass improves `f` by less than `tol · |f|`.
pub fn coordinate_descent(f: &dyn Fn(&[f64]) -> f64, x0: Vec<f64>, sweeps: usize, tol: f64) -> Ascent {
    let mut x = x0;
    let mut fx = f(&x);
    let mut width = vec![4.0f64; x.len()];
    for sweep in 0..sweeps {
        let start = fx;
        for i in 0..x.len() {
            let xi = x[i];
            let base = x.clone();
            let line = |t: f64| {
                let mut z = base.clone();
                z[i] = t;
                f(&z)
            };
            let (t, ft) = golden_min(&line, xi - width[i], xi + width[i], 60);
            if ft < fx {
                let moved = (t - xi).abs();
                x[i] = t;
                fx = ft;
                width[i] = (2.0 * moved).clamp(1e-3, 4.0);
            } else {
                width[i] = (width[i] * 0.5).max(1e-3);
            }
        }
        if start - fx <= tol * fx.abs() {
            return Ascent { x, value: fx, iterations: sweep + 1, converged: true };
        }
    }
    Ascent { x, value: fx, iterations: sweeps, converged: false }
}

/// `x^e` with `0^negative = +∞` and `0^0 = 1`.
pub fn pow(x: f64, e: f64) -> f64 {
    if x == 0.0 {
        if e > 0.0 {
            0.0
        } else if e == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        x.powf(e)
    }
}

/// `num / den` with `0/0 = 0`.
pub fn div0(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}
