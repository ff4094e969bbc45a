//! Closed-form leave-one-out errors and the exhaustive `(eps, delta)` grid tuner.

use std::time::{Duration, Instant};

use nalgebra::DVector;

use crate::error::{PumError, Result};
use crate::geometry::{points_in_ball, PointSet, Subdomain};
use crate::kernels::{kernel_matrix_sym, solve_spd, KernelFamily, RadialKernel};

/// Upper end of the shape-parameter interval `(0, EPS_MAX]`.
pub const EPS_MAX: f64 = 20.0;

/// Per-subdomain search region `(0, eps_max] x [delta_min, 2 delta_min]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchBox {
    eps_max: f64,
    delta_lo: f64,
    delta_hi: f64,
}

impl SearchBox {
    pub fn new(eps_max: f64, delta_min: f64) -> Result<Self> {
        if !(eps_max > 0.0 && eps_max.is_finite()) {
            return Err(PumError::Domain(format!(
                "eps_max must be positive, got {eps_max}"
            )));
        }
        if !(delta_min > 0.0 && delta_min.is_finite()) {
            return Err(PumError::Domain(format!(
                "delta_min must be positive, got {delta_min}"
            )));
        }
        Ok(Self {
            eps_max,
            delta_lo: delta_min,
            delta_hi: 2.0 * delta_min,
        })
    }

    pub fn for_subdomain(sub: &Subdomain) -> Self {
        Self {
            eps_max: EPS_MAX,
            delta_lo: sub.delta_min(),
            delta_hi: 2.0 * sub.delta_min(),
        }
    }

    pub fn eps_max(&self) -> f64 {
        self.eps_max
    }

    pub fn delta_range(&self) -> (f64, f64) {
        (self.delta_lo, self.delta_hi)
    }

    pub fn contains(&self, eps: f64, delta: f64) -> bool {
        eps > 0.0 && eps <= self.eps_max && delta >= self.delta_lo && delta <= self.delta_hi
    }

    /// Maps `u in (0,1] x [0,1]` onto the box.
    pub fn from_unit(&self, u: [f64; 2]) -> (f64, f64) {
        let eps = self.eps_max * u[0];
        let delta = self.delta_lo + u[1] * (self.delta_hi - self.delta_lo);
        (eps, delta.min(self.delta_hi))
    }

    pub fn to_unit(&self, eps: f64, delta: f64) -> [f64; 2] {
        [
            eps / self.eps_max,
            (delta - self.delta_lo) / (self.delta_hi - self.delta_lo),
        ]
    }
}

/// Grid resolution: `n_eps` shape parameters times `n_delta` radii.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    pub n_eps: usize,
    pub n_delta: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            n_eps: 500,
            n_delta: 30,
        }
    }
}

impl GridSpec {
    pub fn new(n_eps: usize, n_delta: usize) -> Result<Self> {
        if n_eps == 0 || n_delta == 0 {
            return Err(PumError::Domain(format!(
                "grid counts must be positive, got {n_eps} x {n_delta}"
            )));
        }
        Ok(Self { n_eps, n_delta })
    }

    /// `eps_i = eps_max * i / n_eps` for `i = 1..=n_eps`; zero is excluded.
    pub fn eps_samples(&self, bx: &SearchBox) -> Vec<f64> {
        (1..=self.n_eps)
            .map(|i| bx.eps_max * i as f64 / self.n_eps as f64)
            .collect()
    }

    /// Equispaced radii including both endpoints; a single sample sits at `delta_min`.
    pub fn delta_samples(&self, bx: &SearchBox) -> Vec<f64> {
        if self.n_delta == 1 {
            return vec![bx.delta_lo];
        }
        let span = bx.delta_hi - bx.delta_lo;
        (0..self.n_delta)
            .map(|j| {
                if j + 1 == self.n_delta {
                    bx.delta_hi
                } else {
                    bx.delta_lo + span * j as f64 / (self.n_delta - 1) as f64
                }
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.n_eps * self.n_delta
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneResult {
    pub best_eps: f64,
    pub best_delta: f64,
    pub best_score: f64,
    pub evaluations: usize,
    pub elapsed: Duration,
}

/// Leave-one-out residuals of a kernel interpolant.
#[derive(Debug, Clone, PartialEq)]
pub struct RippaErrors {
    pub errors: DVector<f64>,
    /// Jitter of the factorization the residuals were computed from.
    pub jitter_used: f64,
}

impl RippaErrors {
    pub fn max_abs(&self) -> f64 {
        self.errors.iter().fold(0.0, |m, e| m.max(e.abs()))
    }
}

/// `e_k = c_k / (K^-1)_kk` from a single factorization of the local system.
pub fn rippa_errors(train: &PointSet, kernel: &RadialKernel) -> Result<RippaErrors> {
    let values = train.require_values()?;
    if train.len() < 2 {
        return Err(PumError::InsufficientPoints {
            needed: 2,
            found: train.len(),
        });
    }
    let k = kernel_matrix_sym(kernel, train);
    let (c, fact) = solve_spd(&k, &DVector::from_column_slice(values))?;
    let diag = fact.inverse_diagonal();
    Ok(RippaErrors {
        errors: c.component_div(&diag),
        jitter_used: fact.jitter_used(),
    })
}

/// Max-abs Rippa error of the local fit on the ball of radius `delta`
/// around the subdomain center.
pub fn loocv_criterion(
    train: &PointSet,
    sub: &Subdomain,
    family: KernelFamily,
    eps: f64,
    delta: f64,
) -> Result<f64> {
    let kernel = RadialKernel::new(family, eps)?;
    let members = points_in_ball(train, sub.center().coords(), delta);
    if members.len() < 2 {
        return Err(PumError::InsufficientPoints {
            needed: 2,
            found: members.len(),
        });
    }
    Ok(rippa_errors(&train.subset(&members), &kernel)?.max_abs())
}

/// Scores every grid pair and returns the minimizer.
///
/// Pairs whose system stays singular score `+inf`. Ties go to the smaller
/// `eps`, then the smaller `delta`.
pub fn grid_search(
    train: &PointSet,
    sub: &Subdomain,
    family: KernelFamily,
    grid: GridSpec,
) -> Result<TuneResult> {
    let start = Instant::now();
    let bx = SearchBox::for_subdomain(sub);
    let deltas = grid.delta_samples(&bx);
    let mut best: Option<(f64, f64, f64)> = None;
    let mut evaluations = 0;
    for eps in grid.eps_samples(&bx) {
        for &delta in &deltas {
            evaluations += 1;
            let score = match loocv_criterion(train, sub, family, eps, delta) {
                Ok(s) if s.is_nan() => f64::INFINITY,
                Ok(s) => s,
                Err(PumError::SingularSystem { .. }) => f64::INFINITY,
                Err(e) => return Err(e),
            };
            // iteration is eps-major with ascending samples, so strict
            // improvement implements the tie-break
            if best.is_none_or(|(_, _, b)| score < b) {
                best = Some((eps, delta, score));
            }
        }
    }
    let (best_eps, best_delta, best_score) = best.expect("grid is non-empty");
    if best_score.is_infinite() {
        return Err(PumError::SingularSystem {
            size: sub.members().len(),
            max_jitter: f64::NAN,
        });
    }
    Ok(TuneResult {
        best_eps,
        best_delta,
        best_score,
        evaluations,
        elapsed: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{generate_uniform_points, Point};
    use crate::pum::franke_like;

    fn subdomain(set: &PointSet, center: [f64; 2], delta_min: f64) -> Subdomain {
        Subdomain::new(
            set,
            Point::new(center.to_vec()).unwrap(),
            delta_min,
            delta_min,
        )
        .unwrap()
    }

    #[test]
    fn zero_data_has_zero_errors() {
        let s = generate_uniform_points(10, 2, 1)
            .unwrap()
            .with_function(|_| 0.0);
        let k = RadialKernel::new(KernelFamily::Gaussian, 4.0).unwrap();
        let e = rippa_errors(&s, &k).unwrap();
        assert!(e.errors.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn symmetric_pair_has_equal_errors() {
        let s =
            PointSet::from_points(&[vec![0.3, 0.5], vec![0.7, 0.5]], Some(vec![1.5, 1.5])).unwrap();
        let k = RadialKernel::new(KernelFamily::Matern4, 3.0).unwrap();
        let e = rippa_errors(&s, &k).unwrap();
        assert!((e.errors[0].abs() - e.errors[1].abs()).abs() <= 1e-15);
    }

    #[test]
    fn single_point_is_insufficient() {
        let s = PointSet::from_points(&[vec![0.3, 0.5]], Some(vec![1.0])).unwrap();
        let k = RadialKernel::new(KernelFamily::Matern4, 3.0).unwrap();
        assert!(matches!(
            rippa_errors(&s, &k),
            Err(PumError::InsufficientPoints {
                needed: 2,
                found: 1
            })
        ));
    }

    #[test]
    fn criterion_composes_rippa_errors() {
        let s = generate_uniform_points(80, 2, 4)
            .unwrap()
            .with_function(|p| franke_like(p[0], p[1]));
        let sub = subdomain(&s, [0.5, 0.5], 0.25);
        let c = loocv_criterion(&s, &sub, KernelFamily::Gaussian, 6.0, 0.3).unwrap();
        let members = points_in_ball(&s, &[0.5, 0.5], 0.3);
        let k = RadialKernel::new(KernelFamily::Gaussian, 6.0).unwrap();
        let direct = rippa_errors(&s.subset(&members), &k).unwrap();
        let max = direct.errors.iter().map(|e| e.abs()).fold(0.0, f64::max);
        assert_eq!(c.to_bits(), max.to_bits());
    }

    #[test]
    fn criterion_vanishes_on_zero_data() {
        let s = generate_uniform_points(60, 2, 4)
            .unwrap()
            .with_function(|_| 0.0);
        let sub = subdomain(&s, [0.5, 0.5], 0.3);
        for (eps, delta) in [(0.5, 0.3), (10.0, 0.45), (20.0, 0.6)] {
            assert_eq!(
                loocv_criterion(&s, &sub, KernelFamily::Matern4, eps, delta).unwrap(),
                0.0
            );
        }
    }

    #[test]
    fn grid_samples() {
        let bx = SearchBox::new(20.0, 0.1).unwrap();
        let g = GridSpec::new(4, 3).unwrap();
        assert_eq!(g.eps_samples(&bx), vec![5.0, 10.0, 15.0, 20.0]);
        let d = g.delta_samples(&bx);
        assert_eq!(d.len(), 3);
        assert_eq!((d[0], d[2]), (0.1, 0.2));
        assert!((d[1] - 0.15).abs() < 1e-16);
        assert_eq!(GridSpec::new(1, 1).unwrap().delta_samples(&bx), vec![0.1]);
        assert!(GridSpec::new(0, 3).is_err());
        let default = GridSpec::default();
        assert_eq!((default.n_eps, default.n_delta), (500, 30));
    }

    #[test]
    fn singleton_grid() {
        let s = generate_uniform_points(60, 2, 9)
            .unwrap()
            .with_function(|p| franke_like(p[0], p[1]));
        let sub = subdomain(&s, [0.4, 0.6], 0.3);
        let r = grid_search(
            &s,
            &sub,
            KernelFamily::Gaussian,
            GridSpec::new(1, 1).unwrap(),
        )
        .unwrap();
        assert_eq!((r.best_eps, r.best_delta, r.evaluations), (20.0, 0.3, 1));
        let direct = loocv_criterion(&s, &sub, KernelFamily::Gaussian, 20.0, 0.3).unwrap();
        assert_eq!(r.best_score, direct);
    }

    #[test]
    fn zero_surface_tie_breaks_to_smallest_pair() {
        let s = generate_uniform_points(60, 2, 9)
            .unwrap()
            .with_function(|_| 0.0);
        let sub = subdomain(&s, [0.4, 0.6], 0.3);
        let r = grid_search(
            &s,
            &sub,
            KernelFamily::Matern4,
            GridSpec::new(5, 3).unwrap(),
        )
        .unwrap();
        assert_eq!((r.best_eps, r.best_delta, r.best_score), (4.0, 0.3, 0.0));
    }

    #[test]
    fn box_mapping_round_trips() {
        let bx = SearchBox::new(20.0, 0.12).unwrap();
        let (e, d) = bx.from_unit([0.25, 1.0]);
        assert_eq!((e, d), (5.0, 0.24));
        assert!(bx.contains(e, d));
        let u = bx.to_unit(e, d);
        assert!((u[0] - 0.25).abs() < 1e-15 && (u[1] - 1.0).abs() < 1e-15);
        assert!(!bx.contains(0.0, 0.12));
        assert!(!bx.contains(1.0, 0.25));
    }
}
