//! Partition-of-unity blending of local RBF interpolants.

use nalgebra::DVector;

use crate::error::{PumError, Result};
use crate::geometry::{distance, Point, PointSet, Subdomain};
use crate::kernels::{kernel_matrix_sym, solve_spd, RadialKernel};

/// Compactly supported Wendland-type bump `(1 - r/delta)_+^4 (4 r/delta + 1)`
/// used as the Shepard weight generator.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WendlandWeight;

impl WendlandWeight {
    #[inline]
    pub fn value(&self, r: f64, delta: f64) -> f64 {
        let t = r / delta;
        if t >= 1.0 {
            return 0.0;
        }
        let s = 1.0 - t;
        let s2 = s * s;
        s2 * s2 * (4.0 * t + 1.0)
    }
}

fn normalized_weights<'a, I>(x: &[f64], balls: I) -> Result<Vec<(usize, f64)>>
where
    I: IntoIterator<Item = (&'a [f64], f64)>,
{
    let psi = WendlandWeight;
    let mut raw: Vec<(usize, f64)> = balls
        .into_iter()
        .enumerate()
        .filter_map(|(j, (center, delta))| {
            let w = psi.value(distance(x, center), delta);
            (w > 0.0).then_some((j, w))
        })
        .collect();
    let total: f64 = raw.iter().map(|(_, w)| w).sum();
    if raw.is_empty() || !(total > 0.0) {
        return Err(PumError::UncoveredPoint { point: x.to_vec() });
    }
    for (_, w) in &mut raw {
        *w /= total;
    }
    Ok(raw)
}

/// Nonzero Shepard weights `(subdomain index, w_j(x))` at `x`, summing to one.
pub fn shepard_weights(x: &[f64], subdomains: &[Subdomain]) -> Result<Vec<(usize, f64)>> {
    normalized_weights(
        x,
        subdomains.iter().map(|s| (s.center().coords(), s.radius())),
    )
}

/// A local RBF interpolant on one subdomain.
#[derive(Debug, Clone)]
pub struct LocalModel {
    center: Point,
    delta: f64,
    kernel: RadialKernel,
    nodes: PointSet,
    coefficients: DVector<f64>,
    jitter_used: f64,
}

impl LocalModel {
    /// Interpolates the values attached to `nodes`.
    pub fn fit_nodes(
        center: Point,
        delta: f64,
        kernel: RadialKernel,
        nodes: PointSet,
    ) -> Result<Self> {
        if nodes.is_empty() {
            return Err(PumError::EmptySubdomain {
                center: center.coords().to_vec(),
            });
        }
        let f = DVector::from_column_slice(nodes.require_values()?);
        let k = kernel_matrix_sym(&kernel, &nodes);
        let (coefficients, fact) = solve_spd(&k, &f)?;
        Ok(Self {
            center,
            delta,
            kernel,
            nodes,
            coefficients,
            jitter_used: fact.jitter_used(),
        })
    }

    pub fn center(&self) -> &Point {
        &self.center
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn kernel(&self) -> &RadialKernel {
        &self.kernel
    }

    pub fn nodes(&self) -> &PointSet {
        &self.nodes
    }

    pub fn coefficients(&self) -> &DVector<f64> {
        &self.coefficients
    }

    pub fn jitter_used(&self) -> f64 {
        self.jitter_used
    }

    /// `sum_k c_k phi(eps ||x - x_k||)`; defined everywhere, not only inside the ball.
    pub fn value(&self, x: &[f64]) -> f64 {
        self.nodes
            .iter()
            .zip(self.coefficients.iter())
            .map(|(node, c)| c * self.kernel.value(distance(x, node)))
            .sum()
    }
}

/// Fits the local interpolant on the members of `sub`.
pub fn fit_local(train: &PointSet, sub: &Subdomain, kernel: RadialKernel) -> Result<LocalModel> {
    LocalModel::fit_nodes(
        sub.center().clone(),
        sub.radius(),
        kernel,
        train.subset(sub.members()),
    )
}

/// Global interpolant `sum_j w_j(x) P_j(x)`.
#[derive(Debug, Clone)]
pub struct PuInterpolant {
    locals: Vec<LocalModel>,
    weight: WendlandWeight,
}

impl PuInterpolant {
    pub fn new(locals: Vec<LocalModel>) -> Self {
        Self {
            locals,
            weight: WendlandWeight,
        }
    }

    pub fn locals(&self) -> &[LocalModel] {
        &self.locals
    }

    pub fn weight(&self) -> WendlandWeight {
        self.weight
    }

    pub fn weights(&self, x: &[f64]) -> Result<Vec<(usize, f64)>> {
        normalized_weights(x, self.locals.iter().map(|l| (l.center.coords(), l.delta)))
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        Ok(self
            .weights(x)?
            .into_iter()
            .map(|(j, w)| w * self.locals[j].value(x))
            .sum())
    }

    pub fn evaluate_set(&self, points: &PointSet) -> Result<Vec<f64>> {
        points.iter().map(|x| self.evaluate(x)).collect()
    }

    /// `max_i |P(t_i) - f(t_i)|` over a labeled test set.
    pub fn max_abs_error(&self, test: &PointSet) -> Result<f64> {
        let values = test.require_values()?;
        let mut worst = 0.0f64;
        for (x, f) in test.iter().zip(values) {
            worst = worst.max((self.evaluate(x)? - f).abs());
        }
        Ok(worst)
    }

    /// Largest jitter any local solve needed.
    pub fn max_jitter(&self) -> f64 {
        self.locals
            .iter()
            .map(|l| l.jitter_used)
            .fold(0.0, f64::max)
    }
}

/// `2 cos(10 x1) sin(10 x2) + sin(10 x1 x2)`, the benchmark target on `[0,1]^2`.
pub fn franke_like(x1: f64, x2: f64) -> f64 {
    2.0 * (10.0 * x1).cos() * (10.0 * x2).sin() + (10.0 * x1 * x2).sin()
}
