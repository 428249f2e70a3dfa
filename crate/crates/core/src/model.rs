use std::sync::Arc;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{PceError, Result};
use crate::hermite::MultiIndexSet;
use crate::scalar::Real;

/// A Hermite chaos expansion `u_g(ξ) = Σ c_n ψ_n(A ξ)`.
///
/// `rotation` is the cumulative orthonormal map from the original inputs `ξ`
/// to the variables `η = A ξ` in which the coefficients are expressed; it is
/// the identity for an unrotated expansion.
#[derive(Clone, Debug)]
pub struct PceModel<T> {
    basis: Arc<MultiIndexSet>,
    coefficients: Array1<T>,
    rotation: Array2<T>,
}

impl<T: Real> PceModel<T> {
    pub fn new(basis: Arc<MultiIndexSet>, coefficients: Array1<T>) -> Result<Self> {
        let d = basis.dim();
        Self::with_rotation(basis, coefficients, Array2::eye(d))
    }

    pub fn with_rotation(
        basis: Arc<MultiIndexSet>,
        coefficients: Array1<T>,
        rotation: Array2<T>,
    ) -> Result<Self> {
        if coefficients.len() != basis.len() {
            return Err(PceError::DimensionMismatch {
                expected: basis.len(),
                got: coefficients.len(),
            });
        }
        if rotation.dim() != (basis.dim(), basis.dim()) {
            return Err(PceError::DimensionMismatch {
                expected: basis.dim(),
                got: rotation.nrows(),
            });
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(PceError::InvalidArgument("non-finite coefficient".into()));
        }
        Ok(Self {
            basis,
            coefficients,
            rotation,
        })
    }

    pub fn basis(&self) -> &Arc<MultiIndexSet> {
        &self.basis
    }

    pub fn coefficients(&self) -> ArrayView1<'_, T> {
        self.coefficients.view()
    }

    pub fn rotation(&self) -> ArrayView2<'_, T> {
        self.rotation.view()
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn is_rotated(&self) -> bool {
        self.rotation != Array2::eye(self.dim())
    }

    /// Evaluates the expansion at an original-variable point `ξ`.
    pub fn eval(&self, xi: ArrayView1<T>) -> Result<T> {
        if xi.len() != self.dim() {
            return Err(PceError::DimensionMismatch {
                expected: self.dim(),
                got: xi.len(),
            });
        }
        let eta = self.rotation.dot(&xi);
        self.basis.expand(self.coefficients.view(), eta.view())
    }

    /// Evaluates at every row of `points`.
    pub fn eval_many(&self, points: ArrayView2<T>) -> Result<Array1<T>> {
        if points.ncols() != self.dim() {
            return Err(PceError::DimensionMismatch {
                expected: self.dim(),
                got: points.ncols(),
            });
        }
        let eta = points.dot(&self.rotation.t());
        let mut row = Array1::zeros(self.basis.len());
        let mut out = Array1::zeros(points.nrows());
        for (q, e) in eta.outer_iter().enumerate() {
            self.basis.evaluate_into(e, row.view_mut())?;
            out[q] = row.dot(&self.coefficients);
        }
        Ok(out)
    }
}
