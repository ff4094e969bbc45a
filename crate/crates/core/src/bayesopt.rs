//! Gaussian-process surrogate, Expected Improvement and the budgeted BO loop.
//!
//! The loop minimizes a black-box error over a [`SearchBox`]. Internally
//! everything happens on the unit square: inputs are box-normalized, the GP
//! models a monotone transform of the error, and acquisition is a
//! maximization of EI over seeded uniform candidates.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::erf::erfc;

use crate::error::{PumError, Result};
use crate::kernels::SpdFactorization;
use crate::loocv::SearchBox;

/// Per-axis lengthscales tried by marginal-likelihood selection.
pub const LENGTHSCALE_GRID: [f64; 5] = [0.05, 0.1, 0.2, 0.5, 1.0];

/// Diagonal nugget relative to the signal variance.
pub const DEFAULT_NUGGET: f64 = 1e-8;

/// Lower bound on the profiled signal variance (constant outputs profile to zero).
pub const SIGNAL_FLOOR: f64 = 1e-12;

/// Below this predictive standard deviation EI is taken as zero.
pub const SIGMA_FLOOR: f64 = 1e-12;

/// Offset inside the log transform so that a zero error stays finite.
pub const LOG_OFFSET: f64 = 1e-16;

/// How GP covariance hyperparameters are chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HyperPolicy {
    /// Maximize the profiled log marginal likelihood over [`LENGTHSCALE_GRID`]^2.
    MarginalLikelihood { nugget: f64 },
    /// Use the given covariance as is.
    Fixed {
        lengthscales: [f64; 2],
        signal_variance: f64,
        nugget: f64,
    },
}

impl Default for HyperPolicy {
    fn default() -> Self {
        HyperPolicy::MarginalLikelihood {
            nugget: DEFAULT_NUGGET,
        }
    }
}

#[inline]
fn correlation(a: &[f64; 2], b: &[f64; 2], ls: &[f64; 2]) -> f64 {
    let d0 = (a[0] - b[0]) / ls[0];
    let d1 = (a[1] - b[1]) / ls[1];
    (-0.5 * (d0 * d0 + d1 * d1)).exp()
}

fn correlation_matrix(inputs: &[[f64; 2]], ls: &[f64; 2], nugget: f64) -> DMatrix<f64> {
    let s = inputs.len();
    let mut r = DMatrix::zeros(s, s);
    for j in 0..s {
        r[(j, j)] = 1.0 + nugget;
        for i in j + 1..s {
            let v = correlation(&inputs[i], &inputs[j], ls);
            r[(i, j)] = v;
            r[(j, i)] = v;
        }
    }
    r
}

struct Profile {
    fact: SpdFactorization,
    alpha: DVector<f64>,
    signal_variance: f64,
    log_likelihood: f64,
}

fn profile(
    inputs: &[[f64; 2]],
    centered: &DVector<f64>,
    ls: &[f64; 2],
    nugget: f64,
) -> Result<Profile> {
    let s = inputs.len() as f64;
    let fact = SpdFactorization::new(&correlation_matrix(inputs, ls, nugget))?;
    let alpha = fact.solve(centered);
    let quad = centered.dot(&alpha);
    let signal_variance = (quad / s).max(SIGNAL_FLOOR);
    let log_likelihood = -0.5 * quad / signal_variance
        - 0.5 * s * signal_variance.ln()
        - 0.5 * fact.log_det()
        - 0.5 * s * (2.0 * PI).ln();
    Ok(Profile {
        fact,
        alpha,
        signal_variance,
        log_likelihood,
    })
}

/// Log marginal likelihood with the signal variance profiled out,
/// `sigma_f^2 = y^T R^-1 y / s` for the mean-centered outputs `y`.
pub fn profiled_log_likelihood(
    inputs: &[[f64; 2]],
    outputs: &[f64],
    lengthscales: [f64; 2],
    nugget: f64,
) -> Result<f64> {
    let mean = outputs.iter().sum::<f64>() / outputs.len() as f64;
    let centered = DVector::from_iterator(outputs.len(), outputs.iter().map(|y| y - mean));
    Ok(profile(inputs, &centered, &lengthscales, nugget)?.log_likelihood)
}

/// Zero-mean GP on centered outputs with covariance
/// `sigma_f^2 (exp(-sum_a (x_a - x'_a)^2 / (2 l_a^2)) + nugget [x = x'])`.
#[derive(Debug, Clone)]
pub struct GpModel {
    inputs: Vec<[f64; 2]>,
    outputs: Vec<f64>,
    mean: f64,
    lengthscales: [f64; 2],
    signal_variance: f64,
    nugget: f64,
    log_likelihood: f64,
    // factor of the correlation matrix; the covariance is signal_variance times it
    fact: SpdFactorization,
    alpha: DVector<f64>,
}

impl GpModel {
    pub fn inputs(&self) -> &[[f64; 2]] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[f64] {
        &self.outputs
    }

    pub fn output_mean(&self) -> f64 {
        self.mean
    }

    pub fn lengthscales(&self) -> [f64; 2] {
        self.lengthscales
    }

    pub fn signal_variance(&self) -> f64 {
        self.signal_variance
    }

    /// Absolute diagonal noise, `sigma_f^2 * (nugget + jitter)`.
    pub fn noise_variance(&self) -> f64 {
        self.signal_variance * (self.nugget + self.fact.jitter_used())
    }

    pub fn log_likelihood(&self) -> f64 {
        self.log_likelihood
    }

    /// Posterior mean and variance (clamped at zero) at `x`.
    pub fn predict(&self, x: &[f64; 2]) -> (f64, f64) {
        let mut v = Vec::with_capacity(self.inputs.len());
        let mu = self.mean_into(x, &mut v);
        (mu, self.variance_from(&mut v))
    }

    // fills `v` with the correlations to the inputs and returns the mean
    fn mean_into(&self, x: &[f64; 2], v: &mut Vec<f64>) -> f64 {
        v.clear();
        v.extend(
            self.inputs
                .iter()
                .map(|xi| correlation(xi, x, &self.lengthscales)),
        );
        self.mean
            + v.iter()
                .zip(self.alpha.iter())
                .map(|(r, a)| r * a)
                .sum::<f64>()
    }

    fn variance_from(&self, v: &mut [f64]) -> f64 {
        self.fact.forward_substitute(v);
        let explained: f64 = v.iter().map(|t| t * t).sum();
        (self.signal_variance * (1.0 - explained)).max(0.0)
    }
}

pub fn gp_fit(inputs: &[[f64; 2]], outputs: &[f64], policy: HyperPolicy) -> Result<GpModel> {
    if inputs.is_empty() {
        return Err(PumError::InsufficientPoints {
            needed: 1,
            found: 0,
        });
    }
    if inputs.len() != outputs.len() {
        return Err(PumError::DimensionMismatch {
            expected: inputs.len(),
            found: outputs.len(),
        });
    }
    if outputs.iter().any(|y| !y.is_finite()) {
        return Err(PumError::Domain("GP outputs must be finite".into()));
    }
    let mean = outputs.iter().sum::<f64>() / outputs.len() as f64;
    let centered = DVector::from_iterator(outputs.len(), outputs.iter().map(|y| y - mean));

    let (lengthscales, nugget, prof) = match policy {
        HyperPolicy::MarginalLikelihood { nugget } => {
            let mut best: Option<([f64; 2], Profile)> = None;
            let mut last_err = None;
            for l0 in LENGTHSCALE_GRID {
                for l1 in LENGTHSCALE_GRID {
                    match profile(inputs, &centered, &[l0, l1], nugget) {
                        Ok(p) => {
                            if best
                                .as_ref()
                                .is_none_or(|(_, b)| p.log_likelihood > b.log_likelihood)
                            {
                                best = Some(([l0, l1], p));
                            }
                        }
                        Err(e) => last_err = Some(e),
                    }
                }
            }
            match best {
                Some((ls, p)) => (ls, nugget, p),
                None => return Err(last_err.expect("grid is non-empty")),
            }
        }
        HyperPolicy::Fixed {
            lengthscales,
            signal_variance,
            nugget,
        } => {
            let mut p = profile(inputs, &centered, &lengthscales, nugget)?;
            let s = inputs.len() as f64;
            let quad = centered.dot(&p.alpha);
            p.signal_variance = signal_variance;
            p.log_likelihood = -0.5 * quad / signal_variance
                - 0.5 * s * signal_variance.ln()
                - 0.5 * p.fact.log_det()
                - 0.5 * s * (2.0 * PI).ln();
            (lengthscales, nugget, p)
        }
    };

    Ok(GpModel {
        inputs: inputs.to_vec(),
        outputs: outputs.to_vec(),
        mean,
        lengthscales,
        signal_variance: prof.signal_variance,
        nugget,
        log_likelihood: prof.log_likelihood,
        fact: prof.fact,
        alpha: prof.alpha,
    })
}

pub fn gp_predict(model: &GpModel, x: &[f64; 2]) -> (f64, f64) {
    model.predict(x)
}

#[inline]
fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

#[inline]
fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// Closed-form EI of a normal prediction `N(mu, sigma^2)` over the incumbent
/// maximum `best`; zero when `sigma` vanishes.
pub fn expected_improvement(mu: f64, sigma: f64, best: f64) -> f64 {
    if !(sigma >= SIGMA_FLOOR) {
        return 0.0;
    }
    let gain = mu - best;
    let z = gain / sigma;
    (gain * std_normal_cdf(z) + sigma * std_normal_pdf(z)).max(0.0)
}

/// Draws `budget` uniform candidates in `(0,1]^2` and returns the first EI maximizer.
pub fn propose_next<R: Rng + ?Sized>(
    model: &GpModel,
    best: f64,
    budget: usize,
    rng: &mut R,
) -> [f64; 2] {
    // EI grows with sigma and the posterior sd never exceeds the prior sd,
    // so candidates whose prior-sd EI cannot beat the incumbent are skipped.
    let sd_cap = model.signal_variance.sqrt() * (1.0 + 1e-9);
    let mut v = Vec::with_capacity(model.inputs.len());
    let mut winner = None;
    let mut top = f64::NEG_INFINITY;
    for _ in 0..budget.max(1) {
        let u = [1.0 - rng.random::<f64>(), 1.0 - rng.random::<f64>()];
        let mu = model.mean_into(&u, &mut v);
        if winner.is_some() && expected_improvement(mu, sd_cap, best) < top {
            continue;
        }
        let ei = expected_improvement(mu, model.variance_from(&mut v).sqrt(), best);
        if winner.is_none() || ei > top {
            top = ei;
            winner = Some(u);
        }
    }
    winner.expect("budget is at least one")
}

/// Which quantity the surrogate models, as a maximization target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ObjectiveTransform {
    /// `-log10(y + 1e-16)` of the raw error `y`.
    #[default]
    NegLog10,
    /// Plain `-y`.
    Negate,
}

impl ObjectiveTransform {
    pub fn apply(self, y: f64) -> f64 {
        match self {
            ObjectiveTransform::NegLog10 => -(y.max(0.0) + LOG_OFFSET).log10(),
            ObjectiveTransform::Negate => -y,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoConfig {
    pub n_init: usize,
    pub max_bayes_iters: usize,
    /// Stop as soon as the best raw objective is at or below this.
    pub tolerance: f64,
    pub candidate_budget: usize,
    pub seed: u64,
    pub transform: ObjectiveTransform,
    pub nugget: f64,
}

impl Default for BoConfig {
    fn default() -> Self {
        Self {
            n_init: 5,
            max_bayes_iters: 25,
            tolerance: 1e-4,
            candidate_budget: 2048,
            seed: 0,
            transform: ObjectiveTransform::default(),
            nugget: DEFAULT_NUGGET,
        }
    }
}

impl BoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_init == 0 {
            return Err(PumError::Domain("n_init must be at least 1".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(PumError::Domain(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.candidate_budget == 0 {
            return Err(PumError::Domain(
                "candidate budget must be at least 1".into(),
            ));
        }
        if !(self.nugget >= 0.0) {
            return Err(PumError::Domain("nugget must be non-negative".into()));
        }
        Ok(())
    }
}

/// One objective evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub unit: [f64; 2],
    pub eps: f64,
    pub delta: f64,
    /// Raw objective; failures are `+inf`.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoResult {
    pub best_eps: f64,
    pub best_delta: f64,
    pub best_objective: f64,
    pub history: Vec<Observation>,
    pub stopped_by_tolerance: bool,
    pub elapsed: Duration,
}

impl BoResult {
    /// Evaluations made after the random initial design.
    pub fn bayes_iterations(&self, n_init: usize) -> usize {
        self.history.len().saturating_sub(n_init)
    }
}

/// Surrogate targets for the history: transformed values, with failed
/// evaluations pinned one unit below the worst finite target.
fn surrogate_targets(history: &[Observation], transform: ObjectiveTransform) -> Vec<f64> {
    let t: Vec<f64> = history.iter().map(|o| transform.apply(o.value)).collect();
    let worst = t
        .iter()
        .copied()
        .filter(|v| v.is_finite())
        .fold(f64::INFINITY, f64::min);
    let fill = if worst.is_finite() { worst - 1.0 } else { 0.0 };
    t.into_iter()
        .map(|v| if v.is_finite() { v } else { fill })
        .collect()
}

/// [`bo_minimize_with_rng`] with a generator seeded from `config.seed`.
pub fn bo_minimize<F>(objective: F, bx: &SearchBox, config: &BoConfig) -> Result<BoResult>
where
    F: FnMut(f64, f64) -> f64,
{
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    bo_minimize_with_rng(objective, bx, config, &mut rng)
}

/// Minimizes `objective(eps, delta)` over the box: `n_init` random points,
/// then up to `max_bayes_iters` EI-guided steps, stopping once the best
/// value reaches `config.tolerance`.
pub fn bo_minimize_with_rng<F, R>(
    mut objective: F,
    bx: &SearchBox,
    config: &BoConfig,
    rng: &mut R,
) -> Result<BoResult>
where
    F: FnMut(f64, f64) -> f64,
    R: Rng + ?Sized,
{
    config.validate()?;
    let start = Instant::now();
    let mut history: Vec<Observation> = Vec::with_capacity(config.n_init + config.max_bayes_iters);
    let mut best = 0usize;

    let mut observe = |u: [f64; 2], history: &mut Vec<Observation>| -> bool {
        let (eps, delta) = bx.from_unit(u);
        let raw = objective(eps, delta);
        let value = if raw.is_nan() { f64::INFINITY } else { raw };
        history.push(Observation {
            unit: u,
            eps,
            delta,
            value,
        });
        let i = history.len() - 1;
        if value < history[best].value || i == 0 {
            best = i;
        }
        history[best].value <= config.tolerance
    };

    let mut stopped = false;
    for _ in 0..config.n_init {
        let u = [1.0 - rng.random::<f64>(), 1.0 - rng.random::<f64>()];
        if observe(u, &mut history) {
            stopped = true;
            break;
        }
    }

    if !stopped {
        for _ in 0..config.max_bayes_iters {
            let units: Vec<[f64; 2]> = history.iter().map(|o| o.unit).collect();
            let targets = surrogate_targets(&history, config.transform);
            let incumbent = targets.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let policy = HyperPolicy::MarginalLikelihood {
                nugget: config.nugget,
            };
            let u = match gp_fit(&units, &targets, policy) {
                Ok(model) => propose_next(&model, incumbent, config.candidate_budget, rng),
                // surrogate unusable: fall back to a random step
                Err(_) => [1.0 - rng.random::<f64>(), 1.0 - rng.random::<f64>()],
            };
            if observe(u, &mut history) {
                stopped = true;
                break;
            }
        }
    }

    let b = history[best];
    Ok(BoResult {
        best_eps: b.eps,
        best_delta: b.delta,
        best_objective: b.value,
        history,
        stopped_by_tolerance: stopped,
        elapsed: start.elapsed(),
    })
}
