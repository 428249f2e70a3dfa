//! Sparse recovery for `Ψ c ≈ u`: greedy OMP, basis pursuit denoising
//! (plain and weighted), iterated re-weighting and cross-validated choice
//! of the residual tolerance `ε`.

mod bpdn;
mod cross_validation;
mod omp;
mod reweighted;

use ndarray::{Array1, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{PceError, Result};
use crate::scalar::Real;

pub use bpdn::{bpdn_solve, project_weighted_l1, weighted_bpdn_solve, BpdnOptions};
pub use cross_validation::{
    cross_validate_epsilon, reconstruction_size, split_rows, CrossValidation, CvOutcome,
};
pub use omp::omp_solve;
pub use reweighted::{reweighted_l1, DeltaRule};

/// Recovered gPC coefficients, one per basis function.
pub type CoefficientVector<T> = Array1<T>;

/// Relative threshold (to `max |ĉ_i|`) below which a coefficient is not
/// counted in [`SolverReport::support_size`].
pub const SUPPORT_THRESHOLD: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct SolverReport<T> {
    /// `‖Ψ ĉ − u‖₂`
    pub residual_norm: T,
    pub iterations: usize,
    pub l1_norm: T,
    pub support_size: usize,
    /// Columns skipped because they were numerically dependent on the
    /// active set (OMP only).
    pub dropped_columns: Vec<usize>,
    /// Whether the BPDN answer was refined to an exact KKT point.
    pub polished: bool,
}

impl<T: Real> SolverReport<T> {
    pub(crate) fn describe(
        matrix: ArrayView2<T>,
        u: ArrayView1<T>,
        c: &Array1<T>,
        iterations: usize,
    ) -> Self {
        let r = &u - &matrix.dot(c);
        let max = c.iter().fold(T::zero(), |m, x| m.max(x.abs()));
        let cut = max * T::lit(SUPPORT_THRESHOLD);
        Self {
            residual_norm: r.dot(&r).sqrt(),
            iterations,
            l1_norm: c.iter().map(|x| x.abs()).sum(),
            support_size: if max == T::zero() {
                0
            } else {
                c.iter().filter(|x| x.abs() > cut).count()
            },
            dropped_columns: Vec::new(),
            polished: false,
        }
    }
}

/// Diagonal weights `W = diag(w_i)`, all strictly positive.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightMatrix<T> {
    diagonal: Array1<T>,
}

impl<T: Real> WeightMatrix<T> {
    pub fn new(diagonal: Array1<T>) -> Result<Self> {
        if let Some(i) = diagonal
            .iter()
            .position(|w| !(*w > T::zero()) || !w.is_finite())
        {
            return Err(PceError::InvalidArgument(format!(
                "weight {i} is not a positive finite number"
            )));
        }
        Ok(Self { diagonal })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            diagonal: Array1::ones(n),
        }
    }

    pub fn diagonal(&self) -> ArrayView1<'_, T> {
        self.diagonal.view()
    }

    pub fn len(&self) -> usize {
        self.diagonal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diagonal.is_empty()
    }
}

/// Which recovery problem to solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    /// Basis pursuit denoising, `min ‖c‖₁` s.t. `‖Ψc − u‖₂ ≤ ε`.
    L1,
    /// Iterated weighted BPDN with weights `1 / (|ĉ_i| + δ)`.
    ReweightedL1,
    /// Orthogonal matching pursuit.
    Omp,
}

impl SolverKind {
    pub fn tag(self) -> &'static str {
        match self {
            SolverKind::L1 => "l1",
            SolverKind::ReweightedL1 => "reweighted-l1",
            SolverKind::Omp => "omp",
        }
    }
}

/// A solver kind plus the knobs it needs.
#[derive(Clone, Debug)]
pub struct Solver<T> {
    pub kind: SolverKind,
    pub bpdn: BpdnOptions<T>,
    pub reweight_rounds: usize,
    pub delta: DeltaRule<T>,
}

impl<T: Real> Solver<T> {
    pub fn new(kind: SolverKind) -> Self {
        Self {
            kind,
            bpdn: BpdnOptions::default(),
            reweight_rounds: 3,
            delta: DeltaRule::default(),
        }
    }

    pub fn solve(
        &self,
        matrix: ArrayView2<T>,
        u: ArrayView1<T>,
        epsilon: T,
    ) -> Result<(CoefficientVector<T>, SolverReport<T>)> {
        match self.kind {
            SolverKind::L1 => bpdn_solve(matrix, u, epsilon, &self.bpdn),
            SolverKind::ReweightedL1 => reweighted_l1(
                matrix,
                u,
                epsilon,
                self.delta,
                self.reweight_rounds,
                &self.bpdn,
            ),
            SolverKind::Omp => omp_solve(matrix, u, epsilon),
        }
    }
}

pub(crate) fn check_shapes<T: Real>(
    matrix: ArrayView2<T>,
    u: ArrayView1<T>,
    epsilon: T,
) -> Result<()> {
    if matrix.nrows() != u.len() {
        return Err(PceError::DimensionMismatch {
            expected: matrix.nrows(),
            got: u.len(),
        });
    }
    if !(epsilon >= T::zero()) {
        return Err(PceError::InvalidArgument("epsilon must be ≥ 0".into()));
    }
    if u.iter().any(|x| !x.is_finite()) {
        return Err(PceError::InvalidArgument("non-finite observation".into()));
    }
    Ok(())
}
