//! Radial kernels, kernel matrices and jittered SPD solves.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::error::{PumError, Result};
use crate::geometry::{distance, PointSet};

/// Relative jitter levels tried in order; multiplied by `trace(K) / n`.
pub const JITTER_LADDER: [f64; 7] = [0.0, 1e-14, 1e-12, 1e-10, 1e-8, 1e-6, 1e-4];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KernelFamily {
    /// `exp(-(eps r)^2)`
    Gaussian,
    /// Matern C4, `exp(-eps r) (1 + eps r + (eps r)^2 / 3)`, scaled to `phi(0) = 1`.
    Matern4,
    /// `exp(-eps r) (1 + 3 eps r + (eps r)^2)`.
    ///
    /// This polynomial peaks at `eps r = 1` with value `5/e > phi(0)`, so the
    /// kernel is not positive definite and its matrices are generally
    /// indefinite. Kept for reproducing the formula in that form only;
    /// [`KernelFamily::Matern4`] is the usable C4 kernel.
    Matern4Printed,
}

impl KernelFamily {
    /// The positive definite families used by the benchmarks.
    pub const ALL: [KernelFamily; 2] = [KernelFamily::Gaussian, KernelFamily::Matern4];

    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::Gaussian => "gaussian",
            KernelFamily::Matern4 => "matern4",
            KernelFamily::Matern4Printed => "matern4-printed",
        }
    }

    /// `phi(eps r)` for a pre-scaled argument `t = eps r`.
    #[inline]
    pub fn profile(self, t: f64) -> f64 {
        match self {
            KernelFamily::Gaussian => (-t * t).exp(),
            KernelFamily::Matern4 => (-t).exp() * (1.0 + t + t * t / 3.0),
            KernelFamily::Matern4Printed => (-t).exp() * (1.0 + 3.0 * t + t * t),
        }
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelFamily {
    type Err = PumError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "gauss" => Ok(KernelFamily::Gaussian),
            "matern4" | "matern" | "matern-c4" => Ok(KernelFamily::Matern4),
            "matern4-printed" => Ok(KernelFamily::Matern4Printed),
            other => Err(PumError::Domain(format!("unknown kernel family {other:?}"))),
        }
    }
}

/// A kernel family together with its shape parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialKernel {
    family: KernelFamily,
    epsilon: f64,
}

impl RadialKernel {
    pub fn new(family: KernelFamily, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(PumError::Domain(format!(
                "shape parameter must be positive and finite, got {epsilon}"
            )));
        }
        Ok(Self { family, epsilon })
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    #[inline]
    pub fn value(&self, r: f64) -> f64 {
        self.family.profile(self.epsilon * r)
    }
}

pub fn kernel_value(k: &RadialKernel, r: f64) -> f64 {
    k.value(r)
}

/// Dense matrix with entries `phi(eps ||a_i - b_j||)`.
pub fn kernel_matrix(k: &RadialKernel, a: &PointSet, b: &PointSet) -> Result<DMatrix<f64>> {
    if a.dim() != b.dim() {
        return Err(PumError::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(DMatrix::from_fn(a.len(), b.len(), |i, j| {
        k.value(distance(a.point(i), b.point(j)))
    }))
}

/// Symmetric kernel matrix of a set with itself; each distance is computed once.
pub fn kernel_matrix_sym(k: &RadialKernel, a: &PointSet) -> DMatrix<f64> {
    let n = a.len();
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        m[(j, j)] = k.value(0.0);
        for i in j + 1..n {
            let v = k.value(distance(a.point(i), a.point(j)));
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Cholesky factor of `K + jitter I`.
#[derive(Debug, Clone)]
pub struct SpdFactorization {
    // column-major, lower triangle valid, strict upper triangle zero
    lower: DMatrix<f64>,
    jitter: f64,
}

impl SpdFactorization {
    /// Factors `k`, escalating the diagonal shift along [`JITTER_LADDER`].
    pub fn new(k: &DMatrix<f64>) -> Result<Self> {
        let n = k.nrows();
        if n != k.ncols() {
            return Err(PumError::DimensionMismatch {
                expected: n,
                found: k.ncols(),
            });
        }
        let scale = if n == 0 { 1.0 } else { k.trace() / n as f64 };
        let scale = if scale.is_finite() && scale > 0.0 {
            scale
        } else {
            1.0
        };
        for rel in JITTER_LADDER {
            let jitter = rel * scale;
            if let Some(lower) = cholesky(k, jitter) {
                return Ok(Self { lower, jitter });
            }
        }
        Err(PumError::SingularSystem {
            size: n,
            max_jitter: JITTER_LADDER[JITTER_LADDER.len() - 1] * scale,
        })
    }

    pub fn size(&self) -> usize {
        self.lower.nrows()
    }

    /// Diagonal shift that made the factorization succeed (0 when none was needed).
    pub fn jitter_used(&self) -> f64 {
        self.jitter
    }

    pub fn lower(&self) -> &DMatrix<f64> {
        &self.lower
    }

    /// Solves `L y = b` in place.
    pub fn forward_substitute(&self, b: &mut [f64]) {
        let n = self.size();
        let l = self.lower.as_slice();
        for j in 0..n {
            let col = &l[j * n..(j + 1) * n];
            b[j] /= col[j];
            let yj = b[j];
            for i in j + 1..n {
                b[i] -= col[i] * yj;
            }
        }
    }

    /// Solves `L^T x = y` in place.
    pub fn back_substitute(&self, y: &mut [f64]) {
        let n = self.size();
        let l = self.lower.as_slice();
        for j in (0..n).rev() {
            let col = &l[j * n..(j + 1) * n];
            let dot: f64 = (j + 1..n).map(|i| col[i] * y[i]).sum();
            y[j] = (y[j] - dot) / col[j];
        }
    }

    pub fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let mut x = rhs.clone();
        self.forward_substitute(x.as_mut_slice());
        self.back_substitute(x.as_mut_slice());
        x
    }

    /// `log det(K + jitter I)`.
    pub fn log_det(&self) -> f64 {
        2.0 * self.lower.diagonal().iter().map(|d| d.ln()).sum::<f64>()
    }

    /// Diagonal of `(K + jitter I)^-1`, one unit-vector triangular solve per entry.
    pub fn inverse_diagonal(&self) -> DVector<f64> {
        let n = self.size();
        let l = self.lower.as_slice();
        let mut z = vec![0.0; n];
        DVector::from_fn(n, |k, _| {
            // column k of L^-1 is zero above row k
            z[k..].fill(0.0);
            z[k] = 1.0;
            for j in k..n {
                let col = &l[j * n..(j + 1) * n];
                z[j] /= col[j];
                let zj = z[j];
                for i in j + 1..n {
                    z[i] -= col[i] * zj;
                }
            }
            z[k..].iter().map(|v| v * v).sum()
        })
    }
}

fn cholesky(k: &DMatrix<f64>, jitter: f64) -> Option<DMatrix<f64>> {
    let n = k.nrows();
    let mut l = k.clone();
    let data = l.as_mut_slice();
    for j in 0..n {
        let (left, right) = data.split_at_mut(j * n);
        let col_j = &mut right[..n];
        col_j[j] += jitter;
        for kk in 0..j {
            let col_k = &left[kk * n..(kk + 1) * n];
            let ljk = col_k[j];
            if ljk != 0.0 {
                for i in j..n {
                    col_j[i] -= ljk * col_k[i];
                }
            }
        }
        let pivot = col_j[j];
        if !(pivot > 0.0) || !pivot.is_finite() {
            return None;
        }
        let root = pivot.sqrt();
        col_j[..j].fill(0.0);
        col_j[j] = root;
        for v in &mut col_j[j + 1..] {
            *v /= root;
        }
    }
    Some(l)
}

/// Solves `(K + jitter I) c = f` and hands back the factorization for reuse.
pub fn solve_spd(k: &DMatrix<f64>, f: &DVector<f64>) -> Result<(DVector<f64>, SpdFactorization)> {
    if k.nrows() != f.len() {
        return Err(PumError::DimensionMismatch {
            expected: k.nrows(),
            found: f.len(),
        });
    }
    let fact = SpdFactorization::new(k)?;
    let c = fact.solve(f);
    Ok((c, fact))
}

pub fn inverse_diagonal(fact: &SpdFactorization) -> DVector<f64> {
    fact.inverse_diagonal()
}
