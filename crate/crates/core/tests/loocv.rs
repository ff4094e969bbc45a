mod common;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use pumtune::geometry::{generate_uniform_points, PointSet, Subdomain};
use pumtune::harness::build_subdomains;
use pumtune::kernels::{KernelFamily, RadialKernel};
use pumtune::loocv::{grid_search, loocv_criterion, rippa_errors, GridSpec, SearchBox};
use pumtune::pum::franke_like;

fn franke_set(n: usize, seed: u64) -> PointSet {
    generate_uniform_points(n, 2, seed)
        .unwrap()
        .with_function(|p| franke_like(p[0], p[1]))
}

/// Max-abs LOO error at `(eps, delta)` by brute-force membership and refitting.
fn criterion_by_refit(train: &PointSet, center: &[f64], family: &str, eps: f64, delta: f64) -> f64 {
    let idx: Vec<usize> = (0..train.len())
        .filter(|&i| common::dist(train.point(i), center) <= delta)
        .collect();
    let pts: Vec<Vec<f64>> = idx.iter().map(|&i| train.point(i).to_vec()).collect();
    let vals: Vec<f64> = idx.iter().map(|&i| train.values().unwrap()[i]).collect();
    common::loo_by_refit(&pts, &vals, family, eps, 0.0)
        .into_iter()
        .fold(0.0, |m, e| m.max(e.abs()))
}

fn middle_subdomain(train: &PointSet) -> Subdomain {
    let subs = build_subdomains(train, 15).unwrap();
    let mid = subs.len() / 2;
    subs[mid].clone()
}

#[test]
fn grid_search_agrees_with_exhaustive_refitting() {
    let train = franke_set(300, 21);
    let sub = middle_subdomain(&train);
    let grid = GridSpec::new(5, 3).unwrap();
    let bx = SearchBox::for_subdomain(&sub);
    let result = grid_search(&train, &sub, KernelFamily::Matern4, grid).unwrap();
    assert_eq!(result.evaluations, 15);

    let mut scores = Vec::new();
    for eps in grid.eps_samples(&bx) {
        for delta in grid.delta_samples(&bx) {
            let slow = criterion_by_refit(&train, sub.center().coords(), "matern4", eps, delta);
            let fast = loocv_criterion(&train, &sub, KernelFamily::Matern4, eps, delta).unwrap();
            assert!(
                (fast - slow).abs() <= 1e-8 * slow,
                "({eps}, {delta}): {fast} vs {slow}"
            );
            scores.push((eps, delta, slow));
        }
    }
    let best =
        scores.iter().copied().fold(
            (0.0, 0.0, f64::INFINITY),
            |b, s| if s.2 < b.2 { s } else { b },
        );
    assert_eq!((result.best_eps, result.best_delta), (best.0, best.1));
    assert!((result.best_score - best.2).abs() <= 1e-8 * best.2);
}

#[test]
fn grid_samples_follow_the_sampling_rule() {
    let bx = SearchBox::new(20.0, 0.1).unwrap();
    let grid = GridSpec::new(4, 3).unwrap();
    assert_eq!(grid.eps_samples(&bx), vec![5.0, 10.0, 15.0, 20.0]);
    let d = grid.delta_samples(&bx);
    assert_eq!(d.len(), 3);
    assert_eq!(d[0], 0.1);
    assert!((d[1] - 0.15).abs() < 1e-15);
    assert_eq!(d[2], 0.2);
}

#[test]
fn criterion_ignores_point_order() {
    let train = franke_set(250, 22);
    let sub = middle_subdomain(&train);
    let mut order: Vec<usize> = (0..train.len()).collect();
    order.reverse();
    order.rotate_left(37);
    let permuted = train.subset(&order);
    let sub_p = Subdomain::new(
        &permuted,
        sub.center().clone(),
        sub.radius(),
        sub.delta_min(),
    )
    .unwrap();
    for (eps, delta) in [(6.0, sub.delta_min()), (14.0, 1.5 * sub.delta_min())] {
        for family in KernelFamily::ALL {
            let a = loocv_criterion(&train, &sub, family, eps, delta).unwrap();
            let b = loocv_criterion(&permuted, &sub_p, family, eps, delta).unwrap();
            assert!(
                (a - b).abs() <= 1e-9 * a.max(1e-300),
                "{family} {eps}: {a} vs {b}"
            );
        }
    }
}

#[test]
fn zero_data_scores_zero_everywhere() {
    let train = generate_uniform_points(120, 2, 23)
        .unwrap()
        .with_function(|_| 0.0);
    let sub = middle_subdomain(&train);
    let r = grid_search(
        &train,
        &sub,
        KernelFamily::Gaussian,
        GridSpec::new(6, 4).unwrap(),
    )
    .unwrap();
    assert_eq!(r.best_score, 0.0);
    let bx = SearchBox::for_subdomain(&sub);
    assert_eq!(r.best_eps, 20.0 / 6.0);
    assert_eq!(r.best_delta, bx.delta_range().0);
}

#[test]
fn rippa_matches_explicit_inverse() {
    // c_k / (K^-1)_kk with K^-1 formed densely
    let set = franke_set(20, 24);
    let kernel = RadialKernel::new(KernelFamily::Gaussian, 6.0).unwrap();
    let r = rippa_errors(&set, &kernel).unwrap();
    assert_eq!(r.jitter_used, 0.0);
    let n = set.len();
    let k = DMatrix::from_fn(n, n, |i, j| {
        common::kernel_ref("gaussian", 6.0, common::dist(set.point(i), set.point(j)))
    });
    let inv = k.try_inverse().unwrap();
    let c = &inv * DVector::from_column_slice(set.values().unwrap());
    for i in 0..n {
        let e = c[i] / inv[(i, i)];
        assert!((r.errors[i] - e).abs() <= 1e-8 * e.abs());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn rippa_equals_refitting(seed in 0u64..1000, n in 5usize..20, eps in 3.0f64..15.0, matern in any::<bool>()) {
        let family = if matern { "matern4" } else { "gaussian" };
        let set = franke_set(n, seed);
        let kernel = RadialKernel::new(family.parse().unwrap(), eps).unwrap();
        let fast = rippa_errors(&set, &kernel).unwrap();
        let pts: Vec<Vec<f64>> = set.iter().map(|p| p.to_vec()).collect();
        let slow = common::loo_by_refit(&pts, set.values().unwrap(), family, eps, fast.jitter_used);
        for (a, b) in fast.errors.iter().zip(&slow) {
            prop_assert!((a - b).abs() <= 1e-8 * b.abs(), "{} vs {}", a, b);
        }
    }
}
