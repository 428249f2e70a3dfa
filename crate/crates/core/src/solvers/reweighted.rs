use ndarray::{Array1, ArrayView1, ArrayView2};

use super::{bpdn_solve, weighted_bpdn_solve, BpdnOptions, SolverReport, WeightMatrix};
use crate::error::{PceError, Result};
use crate::scalar::Real;

/// Stabiliser `δ` in the weights `w_i = 1 / (|ĉ_i| + δ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DeltaRule<T> {
    Fixed(T),
    /// `δ = factor · max_i |ĉ⁽⁰⁾_i|`, taken from the unweighted solve.
    RelativeToMax(T),
}

impl<T: Real> Default for DeltaRule<T> {
    fn default() -> Self {
        DeltaRule::RelativeToMax(T::lit(1e-4))
    }
}

/// Iteratively re-weighted ℓ1: an unweighted BPDN solve followed by
/// `rounds − 1` weighted solves. The report's iteration count is summed over
/// all rounds.
pub fn reweighted_l1<T: Real>(
    matrix: ArrayView2<T>,
    u: ArrayView1<T>,
    epsilon: T,
    delta: DeltaRule<T>,
    rounds: usize,
    options: &BpdnOptions<T>,
) -> Result<(Array1<T>, SolverReport<T>)> {
    if rounds == 0 {
        return Err(PceError::InvalidArgument(
            "reweighting needs at least one round".into(),
        ));
    }
    let (mut c, mut report) = bpdn_solve(matrix, u, epsilon, options)?;
    let delta = match delta {
        DeltaRule::Fixed(d) => d,
        DeltaRule::RelativeToMax(f) => f * c.iter().fold(T::zero(), |m, v| m.max(v.abs())),
    };
    if !(delta > T::zero()) {
        // All-zero first solve: re-weighting cannot change it.
        return Ok((c, report));
    }
    let mut total = report.iterations;
    for _ in 1..rounds {
        let w = WeightMatrix::new(c.mapv(|v| T::one() / (v.abs() + delta)))?;
        let (next, rep) = weighted_bpdn_solve(matrix, u, epsilon, &w, options)?;
        total += rep.iterations;
        c = next;
        report = rep;
    }
    report.iterations = total;
    Ok((c, report))
}
