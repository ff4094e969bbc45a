//! Radial-basis-function partition-of-unity interpolation with per-subdomain
//! tuning of the shape parameter and the subdomain radius.
//!
//! Two tuners are provided: an exhaustive grid over Rippa's closed-form
//! leave-one-out error ([`loocv`]) and Bayesian optimization with a
//! Gaussian-process surrogate and Expected Improvement ([`bayesopt`]).
//! [`harness`] wires either of them into the full pipeline and reports
//! timing and accuracy.

pub mod bayesopt;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod kernels;
pub mod loocv;
pub mod pum;

pub use bayesopt::{
    bo_minimize, expected_improvement, gp_fit, gp_predict, propose_next, BoConfig, BoResult,
    GpModel, HyperPolicy, ObjectiveTransform,
};
pub use error::{PumError, Result};
pub use geometry::{
    build_center_grid, compute_delta_min, generate_uniform_points, points_in_ball, CenterGrid,
    Point, PointSet, Subdomain,
};
pub use harness::{
    emit_results, run_bo_pum, run_loocv_pum, run_pum, BenchPreset, Dataset, ExperimentConfig,
    Optimizer, ResultRow, TestFunction,
};
pub use kernels::{
    kernel_matrix, kernel_value, solve_spd, KernelFamily, RadialKernel, SpdFactorization,
};
pub use loocv::{grid_search, loocv_criterion, rippa_errors, GridSpec, SearchBox, TuneResult};
pub use pum::{fit_local, franke_like, shepard_weights, LocalModel, PuInterpolant};
