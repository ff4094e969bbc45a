//! Independent reference computations shared by the integration tests.
//!
//! Everything here is written from the defining formulas with dense linear
//! algebra (LU / explicit inverses), so it shares no code path with the
//! library's Cholesky-based routines.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};

pub fn kernel_ref(family: &str, eps: f64, r: f64) -> f64 {
    let t = eps * r;
    match family {
        "gaussian" => (-(t * t)).exp(),
        "matern4" => (-t).exp() * (1.0 + t + t * t / 3.0),
        other => panic!("no reference for {other}"),
    }
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn lu_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    a.clone()
        .lu()
        .solve(b)
        .expect("reference system is singular")
}

/// `f_k - s^(k)(x_k)` by refitting without point `k`, with `jitter` added
/// to the diagonal of every system.
pub fn loo_by_refit(
    points: &[Vec<f64>],
    values: &[f64],
    family: &str,
    eps: f64,
    jitter: f64,
) -> Vec<f64> {
    let n = points.len();
    (0..n)
        .map(|k| {
            let keep: Vec<usize> = (0..n).filter(|&i| i != k).collect();
            let a = DMatrix::from_fn(n - 1, n - 1, |i, j| {
                let v = kernel_ref(family, eps, dist(&points[keep[i]], &points[keep[j]]));
                if i == j {
                    v + jitter
                } else {
                    v
                }
            });
            let f = DVector::from_iterator(n - 1, keep.iter().map(|&i| values[i]));
            let c = lu_solve(&a, &f);
            let pred: f64 = keep
                .iter()
                .zip(c.iter())
                .map(|(&i, ci)| ci * kernel_ref(family, eps, dist(&points[k], &points[i])))
                .sum();
            values[k] - pred
        })
        .collect()
}

fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(&f, a, b, fa, fm, fb, whole, tol, 50)
}

/// `E[max(Y - best, 0)]` for `Y ~ N(mu, sigma^2)` by quadrature over `Y`.
pub fn ei_by_quadrature(mu: f64, sigma: f64, best: f64) -> f64 {
    let density = |y: f64| {
        let z = (y - mu) / sigma;
        (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
    };
    let lo = best.max(mu - 12.0 * sigma);
    let hi = mu + 12.0 * sigma;
    if lo >= hi {
        return 0.0;
    }
    // split at the mode so the bump is resolved on both sides
    let mid = mu.clamp(lo, hi);
    let g = |y: f64| (y - best) * density(y);
    adaptive_simpson(g, lo, mid, 1e-12) + adaptive_simpson(g, mid, hi, 1e-12)
}

pub fn se_cov(a: &[f64; 2], b: &[f64; 2], ls: [f64; 2], sf2: f64) -> f64 {
    let d0 = (a[0] - b[0]) / ls[0];
    let d1 = (a[1] - b[1]) / ls[1];
    sf2 * (-0.5 * (d0 * d0 + d1 * d1)).exp()
}

/// Conditional Gaussian `(mean, variance)` of `f(x)` given noisy data,
/// using an explicit inverse of the data covariance. The prior mean is the
/// constant `mean`.
pub fn gp_conditional(
    inputs: &[[f64; 2]],
    outputs: &[f64],
    mean: f64,
    ls: [f64; 2],
    sf2: f64,
    noise: f64,
    x: &[f64; 2],
) -> (f64, f64) {
    let s = inputs.len();
    let k = DMatrix::from_fn(s, s, |i, j| {
        se_cov(&inputs[i], &inputs[j], ls, sf2) + if i == j { noise } else { 0.0 }
    });
    let kinv = k.try_inverse().expect("covariance is invertible");
    let kx = DVector::from_iterator(s, inputs.iter().map(|xi| se_cov(xi, x, ls, sf2)));
    let y = DVector::from_iterator(s, outputs.iter().map(|v| v - mean));
    let m = mean + (kx.transpose() * &kinv * y)[(0, 0)];
    let v = sf2 - (kx.transpose() * &kinv * &kx)[(0, 0)];
    (m, v)
}
