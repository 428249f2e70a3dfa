use ndarray::{Array1, ArrayView1, ArrayView2};

use super::{check_shapes, SolverReport};
use crate::error::Result;
use crate::linalg::IncrementalQr;
use crate::scalar::Real;

/// Orthogonal matching pursuit.
///
/// Each step adds the column with the largest normalised correlation with
/// the residual and re-solves least squares on the active set. Stops once
/// `‖r‖₂ ≤ ε` or the active set holds `min(M, N)` columns. Columns that are
/// numerically dependent on the active set are skipped and listed in the
/// report.
pub fn omp_solve<T: Real>(
    matrix: ArrayView2<T>,
    u: ArrayView1<T>,
    epsilon: T,
) -> Result<(Array1<T>, SolverReport<T>)> {
    check_shapes(matrix, u, epsilon)?;
    let (m, n) = matrix.dim();
    let norms: Vec<T> = matrix
        .columns()
        .into_iter()
        .map(|c| c.dot(&c).sqrt())
        .collect();
    let mut eligible: Vec<bool> = norms.iter().map(|&x| x > T::zero()).collect();
    let mut qr = IncrementalQr::new(m);
    let mut active: Vec<usize> = Vec::new();
    let mut dropped = Vec::new();
    let mut residual = u.to_owned();
    let mut iterations = 0;
    let cap = m.min(n);

    while residual.dot(&residual).sqrt() > epsilon && active.len() < cap {
        let corr = matrix.t().dot(&residual);
        let best = (0..n)
            .filter(|&j| eligible[j])
            .map(|j| (j, corr[j].abs() / norms[j]))
            .fold(None, |acc: Option<(usize, T)>, (j, v)| match acc {
                Some((_, b)) if b >= v => acc,
                _ => Some((j, v)),
            });
        let Some((j, score)) = best else { break };
        if score == T::zero() {
            break;
        }
        eligible[j] = false;
        if !qr.push(matrix.column(j)) {
            dropped.push(j);
            continue;
        }
        active.push(j);
        iterations += 1;
        let projection = qr.q_times(&qr.qt(u));
        residual = &u - &projection;
    }

    let mut c = Array1::zeros(n);
    if !active.is_empty() {
        for (&j, v) in active.iter().zip(qr.least_squares(u)) {
            c[j] = v;
        }
    }
    let mut report = SolverReport::describe(matrix, u, &c, iterations);
    report.dropped_columns = dropped;
    Ok((c, report))
}
