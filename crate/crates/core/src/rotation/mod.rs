//! Iterative rotations of the input variables to concentrate a Hermite
//! expansion on few coefficients.

mod stiffness;

use std::sync::Arc;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::Rng;

use crate::error::{PceError, Result};
use crate::hermite::{assemble_measurement, MultiIndexSet, SampleSet};
use crate::linalg::symmetric_eigen;
use crate::model::PceModel;
use crate::quadrature::{project_onto_basis, smolyak_grid, SparseGridRule};
use crate::scalar::Real;
use crate::solvers::{cross_validate_epsilon, reconstruction_size, CrossValidation, Solver};

pub use stiffness::{build_stiffness_tensor, gradient_matrix, GradientMatrix, StiffnessTensor};

/// Relative eigenvalue gap below which two eigenvalues count as equal.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// A `d × d` orthonormal matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct RotationMatrix<T> {
    values: Array2<T>,
}

impl<T: Real> RotationMatrix<T> {
    /// Checks `‖A Aᵀ − I‖_max < 1e−10` (scaled to the working precision).
    pub fn new(values: Array2<T>) -> Result<Self> {
        let d = values.nrows();
        if values.ncols() != d {
            return Err(PceError::DimensionMismatch {
                expected: d,
                got: values.ncols(),
            });
        }
        let gram = values.dot(&values.t());
        let tol = T::tol_floor(1e-10) * T::of_usize(d.max(1));
        let off = gram
            .indexed_iter()
            .map(|((i, j), &v)| (v - if i == j { T::one() } else { T::zero() }).abs())
            .fold(T::zero(), T::max);
        if off > tol {
            return Err(PceError::InvalidArgument(format!(
                "matrix is not orthonormal (deviation {:e})",
                off.as_f64()
            )));
        }
        Ok(Self { values })
    }

    pub fn identity(d: usize) -> Self {
        Self {
            values: Array2::eye(d),
        }
    }

    pub fn values(&self) -> &Array2<T> {
        &self.values
    }

    pub fn into_inner(self) -> Array2<T> {
        self.values
    }

    pub fn dim(&self) -> usize {
        self.values.nrows()
    }

    /// `self · other`
    pub fn then_after(&self, other: &Self) -> Self {
        Self {
            values: self.values.dot(&other.values),
        }
    }
}

/// Eigen-decomposes `G = U Λ Uᵀ` and returns `A = Uᵀ` with eigenvalues in
/// descending order. Each eigenvector is signed so that its largest
/// magnitude entry is positive (the first such entry on ties).
pub fn rotation_from_gradient<T: Real>(
    g: &GradientMatrix<T>,
) -> Result<(RotationMatrix<T>, Array1<T>)> {
    let (vals, vecs) = symmetric_eigen(g.values())?;
    let d = vals.len();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        vals[b]
            .partial_cmp(&vals[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut a = Array2::zeros((d, d));
    let mut sorted = Array1::zeros(d);
    for (row, &src) in order.iter().enumerate() {
        let v = vecs.column(src);
        let mut lead = 0;
        for (i, x) in v.iter().enumerate() {
            if x.abs() > v[lead].abs() {
                lead = i;
            }
        }
        let sign = if v[lead] < T::zero() {
            -T::one()
        } else {
            T::one()
        };
        a.row_mut(row).assign(&v.mapv(|x| x * sign));
        sorted[row] = vals[src];
    }
    Ok((RotationMatrix { values: a }, sorted))
}

/// Whether any two eigenvalues (sorted descending) are closer than
/// [`DEGENERACY_TOL`]` · λ₁`.
pub fn has_degenerate_eigenvalues<T: Real>(eigenvalues: ArrayView1<T>) -> bool {
    let top = eigenvalues.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let tol = T::lit(DEGENERACY_TOL) * top;
    eigenvalues
        .windows(2)
        .into_iter()
        .any(|w| (w[0] - w[1]).abs() <= tol)
}

/// Maps every sample through `η = A ξ`.
pub fn rotate_samples<T: Real>(
    a: &RotationMatrix<T>,
    samples: &SampleSet<T>,
) -> Result<SampleSet<T>> {
    if a.dim() != samples.dim() {
        return Err(PceError::DimensionMismatch {
            expected: samples.dim(),
            got: a.dim(),
        });
    }
    SampleSet::new(samples.points().dot(&a.values.t()), samples.seed())
}

/// `S(U) = Σᵢ ‖Uᵢ‖₁` over the columns of `U`. Equal to the sum of absolute
/// entries, so `S(U) = S(Uᵀ)`.
pub fn stopping_metric<T: Real>(u: &RotationMatrix<T>) -> T {
    u.values.iter().map(|x| x.abs()).sum()
}

/// How the initial tolerance `ε` is chosen.
#[derive(Clone, Debug, PartialEq)]
pub enum EpsilonPolicy<T> {
    /// Use this `ε` for every solve, with no cross-validation.
    Fixed(T),
    /// Cross-validate candidates `f · ‖u‖₂` over the given fractions `f`.
    CrossValidated(Vec<T>),
}

impl<T: Real> Default for EpsilonPolicy<T> {
    fn default() -> Self {
        EpsilonPolicy::CrossValidated(
            [1e-4, 1e-3, 1e-2, 1e-1]
                .iter()
                .map(|&f| T::lit(f))
                .collect(),
        )
    }
}

#[derive(Clone, Debug)]
pub struct RotationConfig<T> {
    pub solver: Solver<T>,
    /// Maximum number of rotations `L`.
    pub iterations: usize,
    /// Stop once `|S(U) − d| < θ`. `None` always runs `L` rotations.
    pub threshold: Option<T>,
    pub epsilon: EpsilonPolicy<T>,
    /// Number of log-spaced refinement candidates on `[ε / ratio, ε]`.
    pub refine_candidates: usize,
    pub refine_ratio: T,
    pub cross_validation: CrossValidation,
}

impl<T: Real> RotationConfig<T> {
    /// Defaults: `L = 3`, `θ = 0.15 d`, three candidates on `[ε/5, ε]`.
    pub fn new(solver: Solver<T>, dim: usize) -> Self {
        Self {
            solver,
            iterations: 3,
            threshold: Some(T::lit(0.15) * T::of_usize(dim)),
            epsilon: EpsilonPolicy::default(),
            refine_candidates: 3,
            refine_ratio: T::lit(5.0),
            cross_validation: CrossValidation::default(),
        }
    }
}

/// One solve of the rotation loop. Iteration 0 is the unrotated solve and
/// carries no eigen-information.
#[derive(Clone, Debug, PartialEq)]
pub struct RotationRecord<T> {
    pub iteration: usize,
    pub eigenvalues: Option<Array1<T>>,
    pub stopping_metric: Option<T>,
    pub degenerate: bool,
    pub epsilon: T,
    /// Cumulative rotation the coefficients are expressed in.
    pub rotation: Array2<T>,
    pub coefficients: Array1<T>,
    pub residual_norm: T,
    pub solver_iterations: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RotationHistory<T> {
    pub records: Vec<RotationRecord<T>>,
}

impl<T: Real> RotationHistory<T> {
    /// Expansion after `l` rotations, or after the last one if fewer ran.
    pub fn model_after(&self, basis: &Arc<MultiIndexSet>, l: usize) -> Result<PceModel<T>> {
        let rec = self
            .records
            .get(l.min(self.rotations()))
            .ok_or(PceError::Empty("rotation history"))?;
        PceModel::with_rotation(
            basis.clone(),
            rec.coefficients.clone(),
            rec.rotation.clone(),
        )
    }
}

impl<T> RotationHistory<T> {
    /// Number of rotations applied.
    pub fn rotations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }
}

/// A failed rotation loop, with everything completed before the failure.
#[derive(Debug)]
pub struct RotationFailure<T> {
    pub iteration: usize,
    pub source: PceError,
    pub history: RotationHistory<T>,
}

impl<T> std::fmt::Display for RotationFailure<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "rotation iteration {} failed: {}",
            self.iteration, self.source
        )
    }
}

impl<T: std::fmt::Debug> std::error::Error for RotationFailure<T> {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.source)
    }
}

impl<T> From<RotationFailure<T>> for PceError {
    fn from(f: RotationFailure<T>) -> Self {
        PceError::Rotation {
            iteration: f.iteration,
            completed: f.history.rotations(),
            source: Box::new(f.source),
        }
    }
}

/// Cross-validates over candidates given on the full-sample scale, so the
/// returned `ε` is one of them.
fn cross_validated<T: Real, R: Rng + ?Sized>(
    psi: ArrayView2<T>,
    u: ArrayView1<T>,
    full_candidates: &[T],
    cfg: &RotationConfig<T>,
    rng: &mut R,
) -> Result<T> {
    if full_candidates.len() == 1 {
        return Ok(full_candidates[0]);
    }
    let m = u.len();
    let m_r = reconstruction_size(m, cfg.cross_validation.fraction)?;
    let shrink = (T::of_usize(m_r) / T::of_usize(m)).sqrt();
    let recon: Vec<T> = full_candidates.iter().map(|&e| e * shrink).collect();
    let out = cross_validate_epsilon(psi, u, &recon, cfg.cross_validation, rng, |a, b, e| {
        cfg.solver.solve(a, b, e)
    })?;
    Ok(out.epsilon)
}

/// Initial `ε`. Cross-validated fractions `f` translate to full-sample
/// candidates `f · ‖u‖₂`.
fn initial_epsilon<T: Real, R: Rng + ?Sized>(
    psi: ArrayView2<T>,
    u: ArrayView1<T>,
    cfg: &RotationConfig<T>,
    rng: &mut R,
) -> Result<T> {
    match &cfg.epsilon {
        EpsilonPolicy::Fixed(e) => Ok(*e),
        EpsilonPolicy::CrossValidated(fractions) => {
            if fractions.is_empty() {
                return Err(PceError::Empty("epsilon fractions"));
            }
            let norm = u.dot(&u).sqrt();
            let candidates: Vec<T> = fractions.iter().map(|&f| f * norm).collect();
            cross_validated(psi, u, &candidates, cfg, rng)
        }
    }
}

fn refine_grid<T: Real>(epsilon: T, cfg: &RotationConfig<T>) -> Vec<T> {
    let n = cfg.refine_candidates.max(1);
    if n == 1 {
        return vec![epsilon];
    }
    let ratio = cfg.refine_ratio;
    (0..n)
        .map(|k| {
            let t = T::of_usize(k) / T::of_usize(n - 1);
            epsilon / ratio.powf(T::one() - t)
        })
        .collect()
}

/// Result of [`iterate_rotations`].
#[derive(Clone, Debug)]
pub struct RotationOutcome<T> {
    pub model: PceModel<T>,
    pub history: RotationHistory<T>,
}

/// Compressive sensing with iterative rotations.
///
/// Solves once in the original variables, then repeatedly builds the
/// gradient matrix from the current coefficients, rotates the samples by its
/// eigenvectors, re-selects `ε` on `[ε/5, ε]` and solves again. Stops after
/// `L` rotations or once `|S(U) − d| < θ`. The returned model carries the
/// cumulative rotation `A = Uᵀ_L ⋯ Uᵀ_1`.
pub fn iterate_rotations<T: Real, R: Rng + ?Sized>(
    samples: &SampleSet<T>,
    outputs: ArrayView1<T>,
    basis: &Arc<MultiIndexSet>,
    stiffness: &StiffnessTensor<T>,
    cfg: &RotationConfig<T>,
    rng: &mut R,
) -> std::result::Result<RotationOutcome<T>, RotationFailure<T>> {
    let mut history = RotationHistory::default();
    let fail = |iteration, source, history| RotationFailure {
        iteration,
        source,
        history,
    };
    if outputs.len() != samples.len() {
        let err = PceError::DimensionMismatch {
            expected: samples.len(),
            got: outputs.len(),
        };
        return Err(fail(0, err, history));
    }
    if stiffness.basis().len() != basis.len() || stiffness.dim() != basis.dim() {
        let err = PceError::DimensionMismatch {
            expected: basis.len(),
            got: stiffness.basis().len(),
        };
        return Err(fail(0, err, history));
    }
    let d = basis.dim();

    let first = (|| {
        let psi = assemble_measurement(samples, basis)?;
        let eps = initial_epsilon(psi.values(), outputs, cfg, rng)?;
        let (c, rep) = cfg.solver.solve(psi.values(), outputs, eps)?;
        Ok::<_, PceError>((eps, c, rep))
    })();
    let (mut epsilon, mut coefficients, report) = match first {
        Ok(v) => v,
        Err(e) => return Err(fail(0, e, history)),
    };
    history.records.push(RotationRecord {
        iteration: 0,
        eigenvalues: None,
        stopping_metric: None,
        degenerate: false,
        epsilon,
        rotation: Array2::eye(d),
        coefficients: coefficients.clone(),
        residual_norm: report.residual_norm,
        solver_iterations: report.iterations,
    });

    let mut total = RotationMatrix::identity(d);
    for l in 1..=cfg.iterations {
        let step = (|| {
            let g = gradient_matrix(coefficients.view(), stiffness)?;
            let (a, eigenvalues) = rotation_from_gradient(&g)?;
            let s = stopping_metric(&a);
            let cumulative = a.then_after(&total);
            let rotated = rotate_samples(&cumulative, samples)?;
            let psi = assemble_measurement(&rotated, basis)?;
            let eps = match cfg.epsilon {
                EpsilonPolicy::Fixed(e) => e,
                EpsilonPolicy::CrossValidated(_) => {
                    cross_validated(psi.values(), outputs, &refine_grid(epsilon, cfg), cfg, rng)?
                }
            };
            let (c, rep) = cfg.solver.solve(psi.values(), outputs, eps)?;
            Ok::<_, PceError>((cumulative, eigenvalues, s, eps, c, rep))
        })();
        let (cumulative, eigenvalues, s, eps, c, rep) = match step {
            Ok(v) => v,
            Err(e) => return Err(fail(l, e, history)),
        };
        let degenerate = has_degenerate_eigenvalues(eigenvalues.view());
        history.records.push(RotationRecord {
            iteration: l,
            eigenvalues: Some(eigenvalues),
            stopping_metric: Some(s),
            degenerate,
            epsilon: eps,
            rotation: cumulative.values().clone(),
            coefficients: c.clone(),
            residual_norm: rep.residual_norm,
            solver_iterations: rep.iterations,
        });
        total = cumulative;
        epsilon = eps;
        coefficients = c;
        if let Some(theta) = cfg.threshold {
            if (s - T::of_usize(d)).abs() < theta {
                break;
            }
        }
    }

    let model = PceModel::with_rotation(basis.clone(), coefficients, total.into_inner())
        .map_err(|e| fail(history.rotations(), e, history.clone()))?;
    Ok(RotationOutcome { model, history })
}

/// Sparse grid that integrates products of two order-`P` expansions exactly.
pub fn pullback_rule<T: Real>(basis: &MultiIndexSet) -> Result<SparseGridRule<T>> {
    smolyak_grid(basis.dim(), basis.order() as usize + 1)
}

/// Coefficients `c` in the original variables with
/// `Σ c_n ψ_n(ξ) = Σ c̃_n ψ_n(A ξ)` as polynomials.
///
/// An orthonormal `A` keeps total degree, so the rotated expansion lies in
/// the span of the same basis and projecting it with an exact rule recovers
/// it.
pub fn pullback_coefficients<T: Real>(model: &PceModel<T>) -> Result<Array1<T>> {
    if !model.is_rotated() {
        return Ok(model.coefficients().to_owned());
    }
    let rule = pullback_rule(model.basis())?;
    pullback_with_rule(model, &rule)
}

/// [`pullback_coefficients`] with a caller-supplied rule (reused across
/// models sharing a basis).
pub fn pullback_with_rule<T: Real>(
    model: &PceModel<T>,
    rule: &SparseGridRule<T>,
) -> Result<Array1<T>> {
    if rule.exactness() < 2 * model.basis().order() as usize {
        return Err(PceError::InvalidArgument(format!(
            "pull-back needs exactness {} but the rule has {}",
            2 * model.basis().order(),
            rule.exactness()
        )));
    }
    let values = model.eval_many(rule.nodes())?;
    project_onto_basis(values.as_slice().expect("contiguous"), model.basis(), rule)
}
