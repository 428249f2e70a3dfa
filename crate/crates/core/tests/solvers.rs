mod common;

use common::{bpdn_oracle, gaussian_matrix, rng};
use ndarray::{Array1, Axis};
use rand::seq::index::sample;
use rand::Rng;
use sparse_pce::hermite::{assemble_measurement, build_index_set, SampleSet};
use sparse_pce::solvers::{
    bpdn_solve, cross_validate_epsilon, omp_solve, reweighted_l1, weighted_bpdn_solve, BpdnOptions,
    CrossValidation, DeltaRule, WeightMatrix,
};
use std::sync::Arc;

#[test]
fn bpdn_matches_exhaustive_oracle() {
    let opts = BpdnOptions::default();
    for seed in 0..12u64 {
        let mut r = rng(100 + seed);
        let m = r.gen_range(4..=8);
        let n = r.gen_range(m + 1..=11);
        let a = gaussian_matrix(m, n, seed);
        let u: Array1<f64> = Array1::from_shape_fn(m, |_| r.gen_range(-1.0..1.0));
        let eps = r.gen_range(0.05..0.5) * u.dot(&u).sqrt();
        let (c, rep) = bpdn_solve(a.view(), u.view(), eps, &opts).unwrap();
        let w = vec![1.0; n];
        let oracle = bpdn_oracle(&a, &u, eps, &w);
        assert!(rep.residual_norm <= eps * (1.0 + 1e-6), "seed {seed}");
        assert!(
            (rep.l1_norm - oracle).abs() <= 1e-6 * oracle.max(1.0),
            "seed {seed}: {} vs {oracle} ({c})",
            rep.l1_norm
        );
    }
}

#[test]
fn weighted_bpdn_matches_exhaustive_oracle() {
    let opts = BpdnOptions::default();
    for seed in 0..8u64 {
        let mut r = rng(200 + seed);
        let (m, n) = (6, 10);
        let a = gaussian_matrix(m, n, 50 + seed);
        let u: Array1<f64> = Array1::from_shape_fn(m, |_| r.gen_range(-1.0..1.0));
        let eps = 0.2 * u.dot(&u).sqrt();
        let w: Vec<f64> = (0..n).map(|_| r.gen_range(0.2..5.0)).collect();
        let wm = WeightMatrix::new(Array1::from(w.clone())).unwrap();
        let (c, _) = weighted_bpdn_solve(a.view(), u.view(), eps, &wm, &opts).unwrap();
        let obj: f64 = c.iter().zip(&w).map(|(c, w)| c.abs() * w).sum();
        let oracle = bpdn_oracle(&a, &u, eps, &w);
        assert!(
            (obj - oracle).abs() <= 1e-6 * oracle.max(1.0),
            "seed {seed}: {obj} vs {oracle}"
        );
    }
}

#[test]
fn unit_weights_match_unweighted() {
    let a = gaussian_matrix(30, 80, 7);
    let u = Array1::from_shape_fn(30, |i| (i as f64 * 0.37).sin());
    let eps = 0.1 * u.dot(&u).sqrt();
    let opts = BpdnOptions::default();
    let (c1, _) = bpdn_solve(a.view(), u.view(), eps, &opts).unwrap();
    let (c2, _) =
        weighted_bpdn_solve(a.view(), u.view(), eps, &WeightMatrix::identity(80), &opts).unwrap();
    let diff = (&c1 - &c2).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(diff <= 1e-8);
}

#[test]
fn omp_recovers_sparse_gaussian_signals() {
    let (n, s) = (256usize, 5usize);
    let m = (4.0 * s as f64 * (n as f64).ln()).ceil() as usize;
    let mut ok = 0;
    for seed in 0..100u64 {
        let a = gaussian_matrix(m, n, 1000 + seed);
        let mut r = rng(seed);
        let mut truth = Array1::zeros(n);
        for j in sample(&mut r, n, s) {
            truth[j] = r.gen_range(1.0..2.0) * if r.gen::<bool>() { 1.0 } else { -1.0 };
        }
        let u = a.dot(&truth);
        let (c, _) = omp_solve(a.view(), u.view(), 1e-10 * u.dot(&u).sqrt()).unwrap();
        let err = (&c - &truth).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if err < 1e-6 {
            ok += 1;
        }
    }
    assert!(ok >= 95, "{ok}/100");
}

#[test]
fn hermite_sparse_recovery_all_solvers() {
    let basis = Arc::new(build_index_set(4, 3).unwrap());
    let samples = SampleSet::gaussian(30, 4, 3).unwrap();
    let psi = assemble_measurement(&samples, &basis).unwrap();
    let mut truth: Array1<f64> = Array1::zeros(basis.len());
    truth[0] = 1.0;
    truth[2] = -0.5;
    truth[9] = 0.25;
    let u: Array1<f64> = psi.values().dot(&truth);
    let eps = 1e-8 * u.dot(&u).sqrt();
    let opts = BpdnOptions::default();
    for (name, c) in [
        (
            "l1",
            bpdn_solve(psi.values(), u.view(), eps, &opts).unwrap().0,
        ),
        ("omp", omp_solve(psi.values(), u.view(), eps).unwrap().0),
        (
            "rw",
            reweighted_l1(psi.values(), u.view(), eps, DeltaRule::default(), 3, &opts)
                .unwrap()
                .0,
        ),
    ] {
        let err = (&c - &truth).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(err < 1e-6, "{name}: {err}");
    }
}

#[test]
fn cross_validation_prefers_noise_level() {
    let a = gaussian_matrix(120, 200, 11);
    let mut r = rng(9);
    let mut truth = Array1::zeros(200);
    for j in 0..6 {
        truth[j * 13] = 1.0;
    }
    let noise = 0.05;
    let u = a.dot(&truth)
        + Array1::from_shape_fn(120, |_| noise * (r.gen::<f64>() - 0.5) * 12f64.sqrt());
    let noise_norm = noise * (0.8 * 120.0f64).sqrt();
    let candidates = [noise_norm * 1e-3, noise_norm, noise_norm * 30.0];
    let opts = BpdnOptions::default();
    let out = cross_validate_epsilon(
        a.view(),
        u.view(),
        &candidates,
        CrossValidation::default(),
        &mut r,
        |a, u, e| bpdn_solve(a, u, e, &opts),
    )
    .unwrap();
    assert_eq!(out.chosen, 1, "{:?}", out.validation_errors);
    let expect = (120.0f64 / 96.0).sqrt() * candidates[1];
    assert!((out.epsilon - expect).abs() < 1e-12);
    let _ = a.select(Axis(0), &[0]);
}
