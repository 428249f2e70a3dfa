//! End-to-end acceptance checks. Runs as a plain binary and prints one
//! PASS/FAIL line per check; the exit status is nonzero if any failed.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use ndarray::{Array1, Array2, ArrayView1};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use sparse_pce::benchmarks::{
    kl_exponential, qoi_equal_importance, EllipticProblem, ProblemKind, DEFAULT_PANELS,
};
use sparse_pce::harness::{summarize, Experiment, ExperimentConfig, SummaryRow};
use sparse_pce::hermite::{
    assemble_measurement, basis_gradient, basis_size, build_index_set, mutual_coherence,
    MultiIndexSet, SampleSet,
};
use sparse_pce::linalg::symmetric_eigen;
use sparse_pce::model::PceModel;
use sparse_pce::quadrature::{expectation, smolyak_grid};
use sparse_pce::rotation::{
    build_stiffness_tensor, gradient_matrix, iterate_rotations, pullback_coefficients,
    rotate_samples, rotation_from_gradient, EpsilonPolicy, RotationConfig, RotationMatrix,
};
use sparse_pce::solvers::{
    bpdn_solve, omp_solve, weighted_bpdn_solve, BpdnOptions, Solver, SolverKind, WeightMatrix,
};

type Outcome = Result<String, String>;
type Check<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

macro_rules! ensure {
    ($cond:expr, $($arg:tt)*) => {
        if !$cond {
            return Err(format!($($arg)*));
        }
    };
}

fn max_abs(a: ArrayView1<f64>) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn basis_sizes() -> Outcome {
    let mut got = Vec::new();
    for (d, p, want) in [(12, 3, 455), (15, 3, 816), (10, 4, 1001), (100, 2, 5151)] {
        let n = basis_size(d, p).ok_or("overflow")?;
        let set = build_index_set(d, p).map_err(|e| e.to_string())?;
        ensure!(
            n == want && set.len() == want,
            "d={d}, P={p}: {n} / {} vs {want}",
            set.len()
        );
        got.push(format!("{n}"));
    }
    Ok(got.join(", "))
}

fn orthonormality() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for d in 1..=4 {
        for p in 1..=4u32 {
            let basis = build_index_set(d, p).map_err(|e| e.to_string())?;
            let rule = smolyak_grid::<f64>(d, p as usize + 1).map_err(|e| e.to_string())?;
            let n = basis.len();
            let mut gram = Array2::<f64>::zeros((n, n));
            for (x, &w) in rule.nodes().rows().into_iter().zip(rule.weights()) {
                let psi = basis.evaluate(x).map_err(|e| e.to_string())?;
                for i in 0..n {
                    gram.row_mut(i).scaled_add(w * psi[i], &psi);
                }
            }
            let dev = (&gram - &Array2::<f64>::eye(n))
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()));
            worst = worst.max(dev);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure!(worst < 1e-10, "max |G − I| = {worst:.2e}");
    ensure!(secs < 10.0, "took {secs:.1} s");
    Ok(format!("max |G − I| = {worst:.2e}, {secs:.2} s"))
}

fn gradient(basis: &MultiIndexSet, c: &Array1<f64>, x: ArrayView1<f64>) -> Array1<f64> {
    let mut g = Array1::zeros(basis.dim());
    for (alpha, &ck) in basis.indices().iter().zip(c) {
        g.scaled_add(ck, &basis_gradient(alpha, x).unwrap());
    }
    g
}

fn stiffness_oracle() -> Outcome {
    let start = Instant::now();
    let basis = Arc::new(build_index_set(3, 3).map_err(|e| e.to_string())?);
    let k = build_stiffness_tensor::<f64>(&basis).map_err(|e| e.to_string())?;
    let rule = smolyak_grid::<f64>(3, 3).map_err(|e| e.to_string())?;
    let mut rng = common::rng(21);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let c: Array1<f64> = (0..basis.len())
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        let g = gradient_matrix(c.view(), &k).map_err(|e| e.to_string())?;
        for i in 0..3 {
            for j in 0..3 {
                let q = expectation(
                    |x| {
                        let grad = gradient(&basis, &c, x);
                        grad[i] * grad[j]
                    },
                    &rule,
                )
                .map_err(|e| e.to_string())?;
                worst = worst.max((q - g.values()[[i, j]]).abs());
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure!(worst < 1e-10, "max deviation {worst:.2e}");
    ensure!(secs < 30.0, "took {secs:.1} s");
    Ok(format!("max deviation {worst:.2e}, {secs:.2} s"))
}

fn sum_of_inputs_rotation() -> Outcome {
    let d = 4;
    let basis = Arc::new(build_index_set(d, 3).map_err(|e| e.to_string())?);
    let k = build_stiffness_tensor::<f64>(&basis).map_err(|e| e.to_string())?;
    let mut c = Array1::<f64>::zeros(basis.len());
    for i in 1..=d {
        c[i] = 1.0;
    }
    let g = gradient_matrix(c.view(), &k).map_err(|e| e.to_string())?;
    let ones = g
        .values()
        .iter()
        .fold(0.0f64, |m, v| m.max((v - 1.0).abs()));
    ensure!(ones < 1e-12, "G deviates from all-ones by {ones:.2e}");
    let (a, _) = rotation_from_gradient(&g).map_err(|e| e.to_string())?;
    let cos = a.values().row(0).sum() / (d as f64).sqrt();
    ensure!(cos.abs() > 1.0 - 1e-10, "|cos| = {cos}");

    let samples = SampleSet::<f64>::gaussian(60, d, 3).map_err(|e| e.to_string())?;
    let u: Array1<f64> = samples
        .points()
        .rows()
        .into_iter()
        .map(|x| x.sum())
        .collect();
    let mut cfg = RotationConfig::new(Solver::new(SolverKind::L1), d);
    cfg.iterations = 1;
    cfg.threshold = None;
    cfg.epsilon = EpsilonPolicy::Fixed(1e-10 * u.dot(&u).sqrt());
    let out = iterate_rotations(&samples, u.view(), &basis, &k, &cfg, &mut common::rng(0))
        .map_err(|e| e.to_string())?;
    let ct = out.model.coefficients();
    let off: f64 = ct
        .iter()
        .enumerate()
        .filter(|(n, _)| *n != 1)
        .map(|(_, v)| v.abs())
        .sum();
    ensure!(off < 1e-8, "off-pattern mass {off:.2e}");
    Ok(format!(
        "|cos| = {:.12}, off-pattern mass {off:.2e}",
        cos.abs()
    ))
}

fn equal_importance_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(
        ProblemKind::EqualImportance,
        vec![180],
        vec![
            "standard-l1".parse().unwrap(),
            "rotated-l1-L9".parse().unwrap(),
        ],
    );
    cfg.replicates = 20;
    cfg.seed = 2024;
    cfg
}

fn mean_of(rows: &[SummaryRow], method: &str, m: usize) -> Result<f64, String> {
    rows.iter()
        .find(|r| r.method.to_string() == method && r.m == m)
        .and_then(|r| r.mean_error)
        .ok_or(format!("no result for {method} at M = {m}"))
}

fn equal_importance_rotations(exp: &Experiment) -> Outcome {
    let start = Instant::now();
    let records = exp.run();
    let secs = start.elapsed().as_secs_f64();
    let failed = records.iter().filter(|r| !r.status.is_ok()).count();
    ensure!(failed == 0, "{failed} failed records");
    let rows = summarize(&records).map_err(|e| e.to_string())?;
    let standard = mean_of(&rows, "standard-l1", 180)?;
    let rotated = mean_of(&rows, "rotated-l1-L9", 180)?;
    let detail = format!("standard {standard:.4}, rotated L=9 {rotated:.3e}, {secs:.0} s");
    ensure!(standard > 0.5, "{detail}: standard error not above 0.5");
    ensure!(5.0 * rotated <= standard, "{detail}: improvement below 5x");
    ensure!(secs < 600.0, "{detail}: over ten minutes");
    Ok(detail)
}

fn compressible_ordering() -> Outcome {
    let mut cfg = ExperimentConfig::new(
        ProblemKind::Compressible,
        vec![],
        vec![
            "standard-l1".parse().unwrap(),
            "rotated-l1-L1".parse().unwrap(),
            "rotated-l1-L3".parse().unwrap(),
        ],
    );
    cfg.ratios = vec![0.2, 0.3, 0.4];
    cfg.replicates = 20;
    cfg.seed = 2024;
    let start = Instant::now();
    let exp = Experiment::new(cfg).map_err(|e| e.to_string())?;
    let records = exp.run();
    let failed = records.iter().filter(|r| !r.status.is_ok()).count();
    ensure!(failed == 0, "{failed} failed records");
    let rows = summarize(&records).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    let mut bad = Vec::new();
    for &m in exp.sample_counts() {
        let s = mean_of(&rows, "standard-l1", m)?;
        let l1 = mean_of(&rows, "rotated-l1-L1", m)?;
        let l3 = mean_of(&rows, "rotated-l1-L3", m)?;
        parts.push(format!("M={m}: {s:.4} / {l1:.4} / {l3:.4}"));
        if l3 > 1.05 * l1 || l1 > 1.05 * s {
            bad.push(m);
        }
    }
    let detail = format!(
        "{}, {:.0} s",
        parts.join("; "),
        start.elapsed().as_secs_f64()
    );
    ensure!(bad.is_empty(), "{detail}: ordering broken at M = {bad:?}");
    Ok(detail)
}

fn kl_partial_sums() -> Outcome {
    let a = kl_exponential::<f64>(0.2, 15)
        .map_err(|e| e.to_string())?
        .captured_variance();
    let b = kl_exponential::<f64>(0.25, 10)
        .map_err(|e| e.to_string())?
        .captured_variance();
    let detail = format!("l_c=0.2, d=15: {a:.5}; l_c=0.25, d=10: {b:.5}");
    ensure!(a > 0.93, "{detail}: first below 0.93");
    ensure!(b > 0.96, "{detail}: second below 0.96");
    Ok(detail)
}

fn elliptic_solver() -> Outcome {
    let flat = EllipticProblem::<f64>::new(0.1, 0.0, 0.2, 15, 0.35).map_err(|e| e.to_string())?;
    let u = flat.solve(&[0.0; 15]).map_err(|e| e.to_string())?;
    let closed = (u - 0.35 * 0.65 / 2.2).abs();
    ensure!(closed < 1e-8, "constant coefficient off by {closed:.2e}");
    let p = EllipticProblem::<f64>::standard().map_err(|e| e.to_string())?;
    let fine = p
        .grid(0.35, 2 * DEFAULT_PANELS)
        .map_err(|e| e.to_string())?;
    let mut rng = common::rng(77);
    let mut drift: f64 = 0.0;
    for _ in 0..50 {
        let xi: Vec<f64> = (0..15).map(|_| StandardNormal.sample(&mut rng)).collect();
        let a = p.solve(&xi).map_err(|e| e.to_string())?;
        let b = p.solve_on(&xi, &fine).map_err(|e| e.to_string())?;
        drift = drift.max((a - b).abs());
    }
    ensure!(drift < 1e-9, "refinement drift {drift:.2e}");
    Ok(format!(
        "closed form off by {closed:.1e}, drift {drift:.1e}"
    ))
}

fn double_factorial_odd(k: u32) -> f64 {
    // (k − 1)!! for even k, the Gaussian moment E[x^k].
    (1..k).step_by(2).map(f64::from).product()
}

fn sparse_grid_exactness() -> Outcome {
    let mut rng = common::rng(9);
    let mut worst: f64 = 0.0;
    for d in 1..=6 {
        for p in 1..=4usize {
            let rule = smolyak_grid::<f64>(d, p).map_err(|e| e.to_string())?;
            let top = 2 * p as u32 - 1;
            ensure!(
                rule.exactness() >= top as usize,
                "d={d}, level {p}: exactness {}",
                rule.exactness()
            );
            for _ in 0..5 {
                let mut terms: Vec<(f64, Vec<u32>)> = Vec::new();
                for t in 0..12 {
                    let deg = if t == 0 { top } else { rng.gen_range(0..=top) };
                    let mut k = vec![0u32; d];
                    for _ in 0..deg {
                        k[rng.gen_range(0..d)] += 1;
                    }
                    terms.push((rng.gen_range(-1.0..1.0), k));
                }
                let exact: f64 = terms
                    .iter()
                    .map(|(a, k)| {
                        if k.iter().all(|e| e % 2 == 0) {
                            a * k.iter().map(|&e| double_factorial_odd(e)).product::<f64>()
                        } else {
                            0.0
                        }
                    })
                    .sum();
                let scale: f64 = terms
                    .iter()
                    .map(|(a, k)| {
                        a.abs()
                            * k.iter()
                                .map(|&e| double_factorial_odd(e + e % 2))
                                .product::<f64>()
                    })
                    .sum();
                let q = expectation(
                    |x| {
                        terms
                            .iter()
                            .map(|(a, k)| {
                                a * k
                                    .iter()
                                    .zip(x)
                                    .map(|(&e, &v)| v.powi(e as i32))
                                    .product::<f64>()
                            })
                            .sum()
                    },
                    &rule,
                )
                .map_err(|e| e.to_string())?;
                worst = worst.max((q - exact).abs() / scale.max(1.0));
            }
        }
    }
    ensure!(worst < 1e-10, "max scaled error {worst:.2e}");
    Ok(format!("max scaled error {worst:.2e}"))
}

fn solver_checks() -> Outcome {
    let opts = BpdnOptions::default();
    let mut gap: f64 = 0.0;
    for seed in 0..20u64 {
        let mut r = common::rng(300 + seed);
        let m = r.gen_range(4..=8);
        let n = r.gen_range(m + 1..=12);
        let a = common::gaussian_matrix(m, n, 400 + seed);
        let u: Array1<f64> = Array1::from_shape_fn(m, |_| r.gen_range(-1.0..1.0));
        let eps = r.gen_range(0.05..0.5) * u.dot(&u).sqrt();
        let (_, rep) = bpdn_solve(a.view(), u.view(), eps, &opts).map_err(|e| e.to_string())?;
        let oracle = common::bpdn_oracle(&a, &u, eps, &vec![1.0; n]);
        ensure!(
            rep.residual_norm <= eps * (1.0 + 1e-6),
            "seed {seed}: infeasible"
        );
        gap = gap.max((rep.l1_norm - oracle).abs() / oracle.max(1.0));
    }
    ensure!(gap < 1e-6, "BPDN objective off the oracle by {gap:.2e}");

    let (n, s) = (256usize, 5usize);
    let m = (4.0 * s as f64 * (n as f64).ln()).ceil() as usize;
    let mut recovered = 0;
    for seed in 0..100u64 {
        let a = common::gaussian_matrix(m, n, 5000 + seed);
        let mut r = common::rng(seed);
        let mut truth = Array1::zeros(n);
        for j in rand::seq::index::sample(&mut r, n, s) {
            truth[j] = r.gen_range(1.0..2.0) * if r.gen::<bool>() { 1.0 } else { -1.0 };
        }
        let u = a.dot(&truth);
        let (c, _) =
            omp_solve(a.view(), u.view(), 1e-10 * u.dot(&u).sqrt()).map_err(|e| e.to_string())?;
        if max_abs((&c - &truth).view()) < 1e-6 {
            recovered += 1;
        }
    }
    ensure!(recovered >= 95, "OMP recovered {recovered}/100");

    let a = common::gaussian_matrix(30, 80, 7);
    let u = Array1::from_shape_fn(30, |i| (i as f64 * 0.37).sin());
    let eps = 0.1 * u.dot(&u).sqrt();
    let (c1, _) = bpdn_solve(a.view(), u.view(), eps, &opts).map_err(|e| e.to_string())?;
    let (c2, _) = weighted_bpdn_solve(a.view(), u.view(), eps, &WeightMatrix::identity(80), &opts)
        .map_err(|e| e.to_string())?;
    let diff = max_abs((&c1 - &c2).view());
    ensure!(diff <= 1e-8, "unit weights differ by {diff:.2e}");
    Ok(format!(
        "BPDN gap {gap:.1e}, OMP {recovered}/100 at M={m}, W=I diff {diff:.1e}"
    ))
}

fn random_rotation(d: usize, seed: u64) -> Array2<f64> {
    let a = common::gaussian_matrix(d, d, seed);
    let (_, v) = symmetric_eigen(&(&a + &a.t())).unwrap();
    v
}

fn pullback_pointwise() -> Outcome {
    let d = 12;
    let basis = Arc::new(build_index_set(d, 3).map_err(|e| e.to_string())?);
    let mut rng = common::rng(5);
    let c: Array1<f64> = (0..basis.len())
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    // A sequence of three rotations composed.
    let a = random_rotation(d, 1)
        .dot(&random_rotation(d, 2))
        .dot(&random_rotation(d, 3));
    let rotated = PceModel::with_rotation(basis.clone(), c, a).map_err(|e| e.to_string())?;
    let back = PceModel::new(
        basis.clone(),
        pullback_coefficients(&rotated).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let x: Array1<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
        let u = rotated.eval(x.view()).map_err(|e| e.to_string())?;
        let v = back.eval(x.view()).map_err(|e| e.to_string())?;
        worst = worst.max((u - v).abs() / (1.0 + u.abs()));
    }
    ensure!(worst < 1e-10, "max scaled deviation {worst:.2e}");
    Ok(format!("max scaled deviation {worst:.2e} at d = 12, P = 3"))
}

fn pullback_recovers_coefficients(exp: &Experiment) -> Outcome {
    let rows = exp
        .coefficient_comparison(0, 180)
        .map_err(|e| e.to_string())?;
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    for r in rows
        .iter()
        .filter(|r| r.method.to_string() == "rotated-l1-L9" && r.exact.abs() > 1e-3)
    {
        checked += 1;
        worst = worst.max((r.recovered - r.exact).abs() / r.exact.abs());
    }
    ensure!(checked > 0, "no significant coefficients");
    ensure!(
        worst <= 0.1,
        "worst relative deviation {worst:.3} over {checked} coefficients"
    );
    Ok(format!(
        "{checked} coefficients, worst relative deviation {worst:.2e}"
    ))
}

fn coherence_after_rotation() -> Outcome {
    let (d, p, m) = (12, 3u32, 200);
    let basis = Arc::new(build_index_set(d, p).map_err(|e| e.to_string())?);
    let k = build_stiffness_tensor::<f64>(&basis).map_err(|e| e.to_string())?;
    let mut cfg = RotationConfig::new(Solver::new(SolverKind::Omp), d);
    cfg.iterations = 3;
    cfg.threshold = None;
    let mut total = 0.0;
    for seed in 0..100u64 {
        let samples = SampleSet::<f64>::gaussian(m, d, 10_000 + seed).map_err(|e| e.to_string())?;
        let u: Array1<f64> = samples
            .points()
            .rows()
            .into_iter()
            .map(qoi_equal_importance)
            .collect();
        cfg.epsilon = EpsilonPolicy::Fixed(1e-3 * u.dot(&u).sqrt());
        let out = iterate_rotations(&samples, u.view(), &basis, &k, &cfg, &mut common::rng(seed))
            .map_err(|e| format!("seed {seed}: {e}"))?;
        let last = out.history.records.last().ok_or("empty history")?;
        let a = RotationMatrix::new(last.rotation.clone()).map_err(|e| e.to_string())?;
        let mu0 = mutual_coherence(
            assemble_measurement(&samples, &basis)
                .map_err(|e| e.to_string())?
                .values(),
        )
        .map_err(|e| e.to_string())?;
        let rotated = rotate_samples(&a, &samples).map_err(|e| e.to_string())?;
        let mu3 = mutual_coherence(
            assemble_measurement(&rotated, &basis)
                .map_err(|e| e.to_string())?
                .values(),
        )
        .map_err(|e| e.to_string())?;
        total += (mu3 - mu0).abs();
    }
    let mean = total / 100.0;
    let bound = 3.0 / (m as f64).sqrt();
    ensure!(mean < bound, "mean |Δμ| = {mean:.4} ≥ {bound:.4}");
    Ok(format!("mean |Δμ| = {mean:.4} < {bound:.4}"))
}

fn records_regenerate(exp: &Experiment) -> Outcome {
    let mut cfg = exp.config().clone();
    cfg.replicates = 2;
    let small = Experiment::new(cfg).map_err(|e| e.to_string())?;
    let records = small.run();
    for r in &records {
        let again = small.rerun(r).map_err(|e| e.to_string())?;
        ensure!(
            again.same_outcome(r),
            "{} replicate {} differs on rerun",
            r.method,
            r.replicate
        );
    }
    Ok(format!(
        "{} records regenerated bit-identically",
        records.len()
    ))
}

fn main() {
    let equal = Experiment::new(equal_importance_config());
    let exp = match &equal {
        Ok(e) => Some(e),
        Err(e) => {
            println!("equal-importance experiment could not be set up: {e}");
            None
        }
    };
    let with_exp =
        |f: fn(&Experiment) -> Outcome| move || exp.map_or(Err("no experiment".into()), f);

    let checks: Vec<Check> = vec![
        ("basis sizes", Box::new(basis_sizes)),
        ("orthonormality on sparse grids", Box::new(orthonormality)),
        (
            "stiffness tensor against quadrature",
            Box::new(stiffness_oracle),
        ),
        (
            "sum of inputs rotates onto one variable",
            Box::new(sum_of_inputs_rotation),
        ),
        (
            "rotations on equal-importance function",
            Box::new(with_exp(equal_importance_rotations)),
        ),
        (
            "compressible error ordering",
            Box::new(compressible_ordering),
        ),
        ("KL captured variance", Box::new(kl_partial_sums)),
        ("elliptic solver accuracy", Box::new(elliptic_solver)),
        (
            "sparse-grid polynomial exactness",
            Box::new(sparse_grid_exactness),
        ),
        ("solvers against oracles", Box::new(solver_checks)),
        ("pullback pointwise agreement", Box::new(pullback_pointwise)),
        (
            "pulled-back coefficients match projection",
            Box::new(with_exp(pullback_recovers_coefficients)),
        ),
        (
            "coherence unchanged by rotation",
            Box::new(coherence_after_rotation),
        ),
        (
            "records regenerate from seeds",
            Box::new(with_exp(records_regenerate)),
        ),
    ];

    let mut failures = 0;
    for (name, check) in &checks {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let took = fmt_duration(start.elapsed());
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail} [{took}]"),
            Err(detail) => {
                failures += 1;
                println!("FAIL  {name}: {detail} [{took}]");
            }
        }
    }
    println!(
        "{} of {} checks passed",
        checks.len() - failures,
        checks.len()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}

fn fmt_duration(d: Duration) -> String {
    format!("{:.1} s", d.as_secs_f64())
}
