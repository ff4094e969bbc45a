//! End-to-end experiments: data generation, subdomain setup, per-subdomain
//! tuning with either optimizer, the final global fit and CSV reporting.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bayesopt::{bo_minimize_with_rng, BoConfig};
use crate::error::{PumError, Result};
use crate::geometry::{
    build_center_grid, compute_delta_min, generate_uniform_points, points_in_ball,
    squared_distance, PointSet, Subdomain,
};
use crate::kernels::{KernelFamily, RadialKernel};
use crate::loocv::{grid_search, GridSpec, SearchBox};
use crate::pum::{fit_local, franke_like, LocalModel, PuInterpolant};

/// Domain dimension of the benchmark presets.
pub const BENCH_DIM: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Optimizer {
    Loocv,
    Bo,
}

impl Optimizer {
    pub fn name(self) -> &'static str {
        match self {
            Optimizer::Loocv => "LOOCV",
            Optimizer::Bo => "BO",
        }
    }
}

impl fmt::Display for Optimizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Optimizer {
    type Err = PumError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "loocv" => Ok(Optimizer::Loocv),
            "bo" => Ok(Optimizer::Bo),
            other => Err(PumError::Domain(format!("unknown optimizer {other:?}"))),
        }
    }
}

/// Function sampled at the data sites.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum TestFunction {
    /// `2 cos(10 x1) sin(10 x2) + sin(10 x1 x2)`
    #[default]
    FrankeLike,
    Constant(f64),
}

impl TestFunction {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match *self {
            TestFunction::FrankeLike => franke_like(x[0], x[1]),
            TestFunction::Constant(c) => c,
        }
    }
}

impl FromStr for TestFunction {
    type Err = PumError;

    /// `franke` (or `franke-like`), or a number for a constant function.
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "franke" | "franke-like" | "franke_like" => Ok(TestFunction::FrankeLike),
            other => other
                .parse::<f64>()
                .ok()
                .filter(|c| c.is_finite())
                .map(TestFunction::Constant)
                .ok_or_else(|| PumError::Domain(format!("unknown test function {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n_train: usize,
    pub n_test: usize,
    pub kernel: KernelFamily,
    pub optimizer: Optimizer,
    /// BO stopping tolerance; copied into `bo.tolerance` when the run starts.
    pub tau: f64,
    pub seed: u64,
    pub grid: GridSpec,
    pub bo: BoConfig,
    pub split_fraction: f64,
    pub n_min: usize,
    pub function: TestFunction,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_train: 2000,
            n_test: 1000,
            kernel: KernelFamily::Gaussian,
            optimizer: Optimizer::Bo,
            tau: 1e-4,
            seed: 0,
            grid: GridSpec::default(),
            bo: BoConfig::default(),
            split_fraction: 0.8,
            n_min: 15,
            function: TestFunction::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let floor = 1usize << BENCH_DIM;
        if self.n_train < floor {
            return Err(PumError::Domain(format!(
                "n_train must be at least {floor}, got {}",
                self.n_train
            )));
        }
        if self.n_test == 0 {
            return Err(PumError::Domain("n_test must be positive".into()));
        }
        if !(self.split_fraction > 0.0 && self.split_fraction < 1.0) {
            return Err(PumError::Domain(format!(
                "split fraction must lie in (0, 1), got {}",
                self.split_fraction
            )));
        }
        if self.n_min < 2 {
            return Err(PumError::Domain("n_min must be at least 2".into()));
        }
        if self.n_min > self.n_train {
            return Err(PumError::InsufficientPoints {
                needed: self.n_min,
                found: self.n_train,
            });
        }
        if self.grid.is_empty() {
            return Err(PumError::Domain("empty LOOCV grid".into()));
        }
        BoConfig {
            tolerance: self.tau,
            ..self.bo.clone()
        }
        .validate()
    }
}

/// Mixes a stream id into a seed (splitmix64 finalizer).
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Training and test sets of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub train: PointSet,
    pub test: PointSet,
}

impl Dataset {
    /// Uniform random sites in `[0,1]^2`; the test set uses its own derived seed.
    pub fn generate(
        n_train: usize,
        n_test: usize,
        seed: u64,
        function: TestFunction,
    ) -> Result<Self> {
        let f = |x: &[f64]| function.eval(x);
        let train = generate_uniform_points(n_train, BENCH_DIM, seed)?.with_function(f);
        let test =
            generate_uniform_points(n_test, BENCH_DIM, derive_seed(seed, 1))?.with_function(f);
        Ok(Self { train, test })
    }

    pub fn for_config(config: &ExperimentConfig) -> Result<Self> {
        Self::generate(config.n_train, config.n_test, config.seed, config.function)
    }
}

/// Sub-training / sub-validation partition of a subdomain's members.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
}

/// Shuffles `members` and sends the first `ceil(fraction n)` to training,
/// keeping at least one index on each side. Both halves come back sorted.
pub fn split_subdomain<R: Rng + ?Sized>(
    members: &[usize],
    fraction: f64,
    rng: &mut R,
) -> Result<Split> {
    let n = members.len();
    if n < 2 {
        return Err(PumError::InsufficientPoints {
            needed: 2,
            found: n,
        });
    }
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(PumError::Domain(format!(
            "split fraction {fraction} outside (0, 1)"
        )));
    }
    let mut order = members.to_vec();
    order.shuffle(rng);
    // guard against products like 0.8 * 10 landing a hair above an integer
    let n_train = ((fraction * n as f64) - 1e-9)
        .ceil()
        .clamp(1.0, (n - 1) as f64) as usize;
    let mut validation = order.split_off(n_train);
    order.sort_unstable();
    validation.sort_unstable();
    Ok(Split {
        train: order,
        validation,
    })
}

/// The BO objective of one subdomain: the max-abs error, on the sub-validation
/// points inside the `delta`-ball, of a local fit on the sub-training points
/// inside it. Infeasible or failed pairs give `+inf`.
pub fn bo_objective_for_subdomain<'a>(
    train: &'a PointSet,
    sub: &'a Subdomain,
    family: KernelFamily,
    split: &'a Split,
) -> impl Fn(f64, f64) -> f64 + 'a {
    move |eps, delta| {
        let members = points_in_ball(train, sub.center().coords(), delta);
        let fit_idx = sorted_intersection(&members, &split.train);
        let val_idx = sorted_intersection(&members, &split.validation);
        if fit_idx.is_empty() || val_idx.is_empty() {
            return f64::INFINITY;
        }
        let Ok(kernel) = RadialKernel::new(family, eps) else {
            return f64::INFINITY;
        };
        let Ok(model) =
            LocalModel::fit_nodes(sub.center().clone(), delta, kernel, train.subset(&fit_idx))
        else {
            return f64::INFINITY;
        };
        let values = train.values().expect("training set carries values");
        val_idx
            .iter()
            .map(|&i| (model.value(train.point(i)) - values[i]).abs())
            .fold(0.0, f64::max)
    }
}

fn sorted_intersection(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// One benchmark record.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub n: usize,
    pub optimizer: Optimizer,
    /// BO tolerance; `None` for LOOCV.
    pub tau: Option<f64>,
    pub kernel: KernelFamily,
    pub time_s: f64,
    pub mae: f64,
    pub m: usize,
    pub mean_bo_iters: Option<f64>,
    pub seed: u64,
}

/// Tuned parameters of one subdomain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TunedSubdomain {
    pub eps: f64,
    pub delta: f64,
    pub delta_min: f64,
    /// Criterion value at the tuned pair (Rippa max error or validation MAE).
    pub score: f64,
    pub evaluations: usize,
    pub bayes_iterations: usize,
    pub jitter_used: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub interpolant: PuInterpolant,
    pub row: ResultRow,
    pub tuned: Vec<TunedSubdomain>,
}

/// Centers on the `[0,1]^d` grid with radius `2 delta_min` (the outer search ball).
pub fn build_subdomains(train: &PointSet, n_min: usize) -> Result<Vec<Subdomain>> {
    let d = train.dim();
    let grid = build_center_grid(train.len(), d)?;
    let m = grid.len();
    grid.centers()
        .iter()
        .map(|c| {
            let delta_min = compute_delta_min(train, c.coords(), m, d, n_min)?;
            Subdomain::new(train, c.clone(), 2.0 * delta_min, delta_min)
        })
        .collect()
}

fn tune_subdomain(
    index: usize,
    train: &PointSet,
    sub: &Subdomain,
    config: &ExperimentConfig,
) -> Result<(LocalModel, TunedSubdomain)> {
    let family = config.kernel;
    let (eps, delta, score, evaluations, bayes_iterations) = match config.optimizer {
        Optimizer::Loocv => {
            let r = grid_search(train, sub, family, config.grid)?;
            (r.best_eps, r.best_delta, r.best_score, r.evaluations, 0)
        }
        Optimizer::Bo => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(index as u64 + 1);
            let split = split_subdomain(sub.members(), config.split_fraction, &mut rng)?;
            let objective = bo_objective_for_subdomain(train, sub, family, &split);
            let bo = BoConfig {
                tolerance: config.tau,
                ..config.bo.clone()
            };
            let r = bo_minimize_with_rng(objective, &SearchBox::for_subdomain(sub), &bo, &mut rng)?;
            let iters = r.bayes_iterations(bo.n_init);
            (
                r.best_eps,
                r.best_delta,
                r.best_objective,
                r.history.len(),
                iters,
            )
        }
    };
    let tuned_sub = sub.resized(train, delta)?;
    let model = fit_local(train, &tuned_sub, RadialKernel::new(family, eps)?)?;
    let tuned = TunedSubdomain {
        eps,
        delta,
        delta_min: sub.delta_min(),
        score,
        evaluations,
        bayes_iterations,
        jitter_used: model.jitter_used(),
    };
    Ok((model, tuned))
}

/// Every point must receive a positive weight from some subdomain.
pub fn check_covering(interp: &PuInterpolant, points: &PointSet) -> Result<()> {
    for x in points.iter() {
        let covered = interp
            .locals()
            .iter()
            .any(|l| squared_distance(x, l.center().coords()) < l.delta() * l.delta());
        if !covered {
            return Err(PumError::UncoveredPoint { point: x.to_vec() });
        }
    }
    Ok(())
}

/// Tunes and fits the global interpolant on a prepared dataset. Timing covers
/// subdomain setup, tuning and the final local fits.
pub fn run_pum(config: &ExperimentConfig, data: &Dataset) -> Result<RunOutcome> {
    config.validate()?;
    let train = &data.train;
    train.require_values()?;
    let start = Instant::now();
    let subdomains = build_subdomains(train, config.n_min)?;
    let fitted: Vec<(LocalModel, TunedSubdomain)> = subdomains
        .par_iter()
        .enumerate()
        .map(|(j, sub)| tune_subdomain(j, train, sub, config))
        .collect::<Result<_>>()?;
    let (locals, tuned): (Vec<_>, Vec<_>) = fitted.into_iter().unzip();
    let interpolant = PuInterpolant::new(locals);
    let time_s = start.elapsed().as_secs_f64();

    check_covering(&interpolant, &data.test)?;
    let mae = interpolant.max_abs_error(&data.test)?;
    let mean_bo_iters = (config.optimizer == Optimizer::Bo)
        .then(|| tuned.iter().map(|t| t.bayes_iterations as f64).sum::<f64>() / tuned.len() as f64);
    let row = ResultRow {
        n: train.len(),
        optimizer: config.optimizer,
        tau: (config.optimizer == Optimizer::Bo).then_some(config.tau),
        kernel: config.kernel,
        time_s,
        mae,
        m: tuned.len(),
        mean_bo_iters,
        seed: config.seed,
    };
    Ok(RunOutcome {
        interpolant,
        row,
        tuned,
    })
}

pub fn run_bo_pum(config: &ExperimentConfig) -> Result<(PuInterpolant, ResultRow)> {
    let config = ExperimentConfig {
        optimizer: Optimizer::Bo,
        ..config.clone()
    };
    let out = run_pum(&config, &Dataset::for_config(&config)?)?;
    Ok((out.interpolant, out.row))
}

pub fn run_loocv_pum(config: &ExperimentConfig) -> Result<(PuInterpolant, ResultRow)> {
    let config = ExperimentConfig {
        optimizer: Optimizer::Loocv,
        ..config.clone()
    };
    let out = run_pum(&config, &Dataset::for_config(&config)?)?;
    Ok((out.interpolant, out.row))
}

/// Fits with one fixed `(eps, delta)` pair in every subdomain; `delta` is
/// raised to each subdomain's `delta_min` where it falls short.
pub fn fit_fixed(
    train: &PointSet,
    family: KernelFamily,
    eps: f64,
    delta: f64,
    n_min: usize,
) -> Result<PuInterpolant> {
    let kernel = RadialKernel::new(family, eps)?;
    let subdomains = build_subdomains(train, n_min)?;
    let locals = subdomains
        .par_iter()
        .map(|sub| {
            let radius = delta.clamp(sub.delta_min(), 2.0 * sub.delta_min());
            fit_local(train, &sub.resized(train, radius)?, kernel)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PuInterpolant::new(locals))
}

/// Three significant digits in C-style scientific notation, e.g. `9.73e+02`.
pub fn sci3(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{x:.2e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

pub const RESULTS_HEADER: &str = "N,optimizer,tau,kernel,time_s,mae,m,mean_bo_iters,seed";

fn row_order(a: &ResultRow, b: &ResultRow) -> std::cmp::Ordering {
    let tau_key = |r: &ResultRow| std::cmp::Reverse(r.tau.map(f64::to_bits));
    b.n.cmp(&a.n)
        .then(a.optimizer.cmp(&b.optimizer))
        // larger tolerance first, as in the published table
        .then_with(|| match (a.tau, b.tau) {
            (Some(x), Some(y)) => y.total_cmp(&x),
            _ => tau_key(a).cmp(&tau_key(b)),
        })
        .then(a.kernel.cmp(&b.kernel))
        .then(a.seed.cmp(&b.seed))
}

/// CSV text: header plus rows ordered by N descending, optimizer, tau.
pub fn format_results(rows: &[ResultRow]) -> String {
    let mut sorted: Vec<&ResultRow> = rows.iter().collect();
    sorted.sort_by(|a, b| row_order(a, b));
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for r in sorted {
        let tau = r.tau.map(sci3).unwrap_or_default();
        let iters = r
            .mean_bo_iters
            .map(|v| format!("{v:.2}"))
            .unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.n,
            r.optimizer,
            tau,
            r.kernel,
            sci3(r.time_s),
            sci3(r.mae),
            r.m,
            iters,
            r.seed
        ));
    }
    out
}

pub fn emit_results(rows: &[ResultRow], path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(PumError::Domain("no result rows to write".into()));
    }
    fs::write(path, format_results(rows)).map_err(|source| PumError::Io {
        path: path.to_owned(),
        source,
    })
}

/// A named matrix of experiments in the layout of the published comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchPreset {
    pub name: &'static str,
    pub sizes: Vec<usize>,
    pub kernels: Vec<KernelFamily>,
    pub taus: Vec<f64>,
    pub grid: GridSpec,
    pub n_test: usize,
}

impl BenchPreset {
    pub const NAMES: [&'static str; 4] = ["table1", "desk", "reduced", "smoke"];

    pub fn by_name(name: &str) -> Result<Self> {
        let both = KernelFamily::ALL.to_vec();
        let preset = match name {
            // full matrix: 3 sizes x {LOOCV, BO 1e-4, BO 1e-5} x 2 kernels
            "table1" => Self {
                name: "table1",
                sizes: vec![8000, 4000, 2000],
                kernels: both,
                taus: vec![1e-4, 1e-5],
                grid: GridSpec::default(),
                n_test: 1000,
            },
            "desk" => Self {
                name: "desk",
                sizes: vec![2000],
                kernels: vec![KernelFamily::Gaussian],
                taus: vec![1e-4],
                grid: GridSpec::default(),
                n_test: 1000,
            },
            "reduced" => Self {
                name: "reduced",
                sizes: vec![1000],
                kernels: vec![KernelFamily::Gaussian],
                taus: vec![1e-4],
                grid: GridSpec {
                    n_eps: 100,
                    n_delta: 10,
                },
                n_test: 1000,
            },
            "smoke" => Self {
                name: "smoke",
                sizes: vec![200],
                kernels: both,
                taus: vec![1e-4],
                grid: GridSpec {
                    n_eps: 20,
                    n_delta: 4,
                },
                n_test: 200,
            },
            other => {
                return Err(PumError::Domain(format!(
                    "unknown preset {other:?}; expected one of {:?}",
                    Self::NAMES
                )))
            }
        };
        Ok(preset)
    }

    /// Every experiment of the matrix, derived from `base` (seed, BO and split settings).
    pub fn configs(&self, base: &ExperimentConfig) -> Vec<ExperimentConfig> {
        let mut out = Vec::new();
        for &n in &self.sizes {
            for &kernel in &self.kernels {
                let cell = ExperimentConfig {
                    n_train: n,
                    n_test: self.n_test,
                    kernel,
                    grid: self.grid,
                    ..base.clone()
                };
                out.push(ExperimentConfig {
                    optimizer: Optimizer::Loocv,
                    ..cell.clone()
                });
                for &tau in &self.taus {
                    out.push(ExperimentConfig {
                        optimizer: Optimizer::Bo,
                        tau,
                        ..cell.clone()
                    });
                }
            }
        }
        out
    }
}

/// Runs every cell of a preset. One dataset per size is shared by all cells.
pub fn run_bench(preset: &BenchPreset, base: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::new();
    let mut data: Option<(usize, Dataset)> = None;
    for config in preset.configs(base) {
        if data.as_ref().is_none_or(|(n, _)| *n != config.n_train) {
            data = Some((config.n_train, Dataset::for_config(&config)?));
        }
        let (_, dataset) = data.as_ref().expect("dataset just built");
        rows.push(run_pum(&config, dataset)?.row);
    }
    Ok(rows)
}
