use ndarray::{Array1, ArrayView1, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;

use super::SolverReport;
use crate::error::{PceError, Result};
use crate::scalar::Real;

/// Split used to score each candidate tolerance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrossValidation {
    /// Fraction of rows used for reconstruction.
    pub fraction: f64,
}

impl Default for CrossValidation {
    fn default() -> Self {
        Self { fraction: 0.8 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CvOutcome<T> {
    /// `√(M / M_r) · ε_r*`
    pub epsilon: T,
    /// Index into the candidate list of `ε_r*`.
    pub chosen: usize,
    /// Validation residual per candidate, `None` where the solve failed.
    pub validation_errors: Vec<Option<T>>,
}

/// `M_r = round(fraction · M)`, clamped so both parts are non-empty.
pub fn reconstruction_size(m: usize, fraction: f64) -> Result<usize> {
    if m < 2 {
        return Err(PceError::InvalidArgument(
            "cross-validation needs at least two samples".into(),
        ));
    }
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(PceError::InvalidArgument(format!(
            "split fraction {fraction} outside (0, 1)"
        )));
    }
    Ok(((fraction * m as f64).round() as usize).clamp(1, m - 1))
}

/// Random partition of `0..m` into reconstruction and validation rows, both
/// non-empty.
pub fn split_rows<R: Rng + ?Sized>(
    m: usize,
    fraction: f64,
    rng: &mut R,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let m_r = reconstruction_size(m, fraction)?;
    let mut rows: Vec<usize> = (0..m).collect();
    rows.shuffle(rng);
    let mut recon = rows[..m_r].to_vec();
    let mut valid = rows[m_r..].to_vec();
    recon.sort_unstable();
    valid.sort_unstable();
    Ok((recon, valid))
}

/// Picks `ε` by solving on a reconstruction subset for each candidate
/// `ε_r` and scoring `‖Ψ_v ĉ − u_v‖₂` on the held-out rows. A single split
/// is shared by all candidates. Ties go to the earlier candidate.
pub fn cross_validate_epsilon<T, R, F>(
    matrix: ArrayView2<T>,
    u: ArrayView1<T>,
    candidates: &[T],
    cv: CrossValidation,
    rng: &mut R,
    mut solver: F,
) -> Result<CvOutcome<T>>
where
    T: Real,
    R: Rng + ?Sized,
    F: FnMut(ArrayView2<T>, ArrayView1<T>, T) -> Result<(Array1<T>, SolverReport<T>)>,
{
    if candidates.is_empty() {
        return Err(PceError::Empty("epsilon candidates"));
    }
    if matrix.nrows() != u.len() {
        return Err(PceError::DimensionMismatch {
            expected: matrix.nrows(),
            got: u.len(),
        });
    }
    let m = u.len();
    let (recon, valid) = split_rows(m, cv.fraction, rng)?;
    let a_r = matrix.select(Axis(0), &recon);
    let u_r = u.select(Axis(0), &recon);
    let a_v = matrix.select(Axis(0), &valid);
    let u_v = u.select(Axis(0), &valid);

    let mut errors = Vec::with_capacity(candidates.len());
    let mut failures = Vec::new();
    let mut best: Option<(usize, T)> = None;
    for (k, &eps) in candidates.iter().enumerate() {
        match solver(a_r.view(), u_r.view(), eps) {
            Ok((c, _)) => {
                let r = &u_v - &a_v.dot(&c);
                let e = r.dot(&r).sqrt();
                if e.is_finite() && best.is_none_or(|(_, b)| e < b) {
                    best = Some((k, e));
                }
                errors.push(Some(e));
            }
            Err(err) => {
                failures.push(format!("ε = {:e}: {err}", eps.as_f64()));
                errors.push(None);
            }
        }
    }
    let Some((chosen, _)) = best else {
        return Err(PceError::CrossValidation(failures));
    };
    let factor = (T::of_usize(m) / T::of_usize(recon.len())).sqrt();
    Ok(CvOutcome {
        epsilon: factor * candidates[chosen],
        chosen,
        validation_errors: errors,
    })
}
