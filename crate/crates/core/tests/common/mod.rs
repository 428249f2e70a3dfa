#![allow(dead_code, clippy::needless_range_loop)]

use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(m: usize, n: usize, seed: u64) -> Array2<f64> {
    let mut r = rng(seed);
    Array2::from_shape_fn((m, n), |_| StandardNormal.sample(&mut r))
}

/// Solves the small SPD system `G x = b` by Cholesky.
pub fn cholesky_solve(g: &Array2<f64>, b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = g[[i, j]];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s <= 1e-12 * g[[i, i]].abs().max(1e-300) {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] -= l[i][k] * y[k];
        }
        y[i] /= l[i][i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            y[i] -= l[k][i] * y[k];
        }
        y[i] /= l[i][i];
    }
    Some(y)
}

/// Brute-force optimum of `min ‖c‖₁ s.t. ‖A c − u‖₂ ≤ ε` (plus the weighted
/// variant): every support and sign pattern is tried in closed form and the
/// best sign-consistent candidate is kept.
pub fn bpdn_oracle(a: &Array2<f64>, u: &Array1<f64>, eps: f64, w: &[f64]) -> f64 {
    let (m, n) = a.dim();
    if u.dot(u).sqrt() <= eps {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for mask in 1u32..(1u32 << n) {
        let support: Vec<usize> = (0..n).filter(|&j| mask >> j & 1 == 1).collect();
        let k = support.len();
        if k > m {
            continue;
        }
        let g = Array2::from_shape_fn((k, k), |(p, q)| {
            a.column(support[p]).dot(&a.column(support[q]))
        });
        let atu: Vec<f64> = support.iter().map(|&j| a.column(j).dot(u)).collect();
        let Some(c_ls) = cholesky_solve(&g, &atu) else {
            continue;
        };
        let mut fit = u.clone();
        for (p, &j) in support.iter().enumerate() {
            fit.scaled_add(-c_ls[p], &a.column(j));
        }
        let r0 = fit.dot(&fit);
        if r0 > eps * eps {
            continue;
        }
        for signs in 0u32..(1u32 << k) {
            let s: Vec<f64> = (0..k)
                .map(|p| {
                    if signs >> p & 1 == 1 {
                        -w[support[p]]
                    } else {
                        w[support[p]]
                    }
                })
                .collect();
            let t = cholesky_solve(&g, &s).unwrap();
            let sts: f64 = s.iter().zip(&t).map(|(a, b)| a * b).sum();
            let lambda = ((eps * eps - r0).max(0.0) / sts).sqrt();
            let c: Vec<f64> = c_ls.iter().zip(&t).map(|(c, t)| c - lambda * t).collect();
            if c.iter().zip(&s).all(|(c, s)| c * s > 0.0) {
                let obj: f64 = c.iter().zip(&s).map(|(c, s)| c * s).sum();
                best = best.min(obj);
            }
        }
    }
    best
}
