use std::sync::Arc;

use ndarray::{Array2, ArrayView1};

use crate::error::{PceError, Result};
use crate::hermite::{build_index_set, MultiIndexSet};
use crate::scalar::Real;

/// The blocks `(K_ij)_kl = E[∂ᵢψ_k · ∂ⱼψ_l]` for an orthonormal Hermite
/// basis.
///
/// Since `∂ᵢψ_α = √αᵢ ψ_{α−eᵢ}`, every block factors as `K_ij = D_iᵀ D_j`
/// where `D_i` maps a basis function to its `i`-th partial derivative in the
/// basis of one order lower. Only the non-zeros of the `D_i` are stored,
/// which is at most `P` entries per basis function; each block then has at
/// most one non-zero per row.
#[derive(Clone, Debug)]
pub struct StiffnessTensor<T> {
    basis: Arc<MultiIndexSet>,
    lower_len: usize,
    /// For basis function `k`: `(i, position of α_k − eᵢ, √(α_k)ᵢ)`.
    lowering: Vec<Vec<(u32, u32, T)>>,
}

pub fn build_stiffness_tensor<T: Real>(basis: &Arc<MultiIndexSet>) -> Result<StiffnessTensor<T>> {
    let d = basis.dim();
    let order = basis.order();
    if order == 0 {
        return Ok(StiffnessTensor {
            basis: basis.clone(),
            lower_len: 0,
            lowering: vec![Vec::new(); basis.len()],
        });
    }
    let lower = build_index_set(d, order - 1)?;
    let lowering = basis
        .indices()
        .iter()
        .map(|alpha| {
            alpha
                .terms()
                .iter()
                .map(|&(i, a)| {
                    let beta = alpha.shifted(i as usize, -1).expect("positive entry");
                    let pos = lower
                        .position(&beta)
                        .expect("total-degree set is downward closed");
                    (i, pos as u32, T::of_usize(a as usize).sqrt())
                })
                .collect()
        })
        .collect();
    Ok(StiffnessTensor {
        basis: basis.clone(),
        lower_len: lower.len(),
        lowering,
    })
}

impl<T: Real> StiffnessTensor<T> {
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn basis(&self) -> &Arc<MultiIndexSet> {
        &self.basis
    }

    /// The only non-zero of row `k` in block `K_ij`, as `(l, value)`.
    pub fn row(&self, i: usize, j: usize, k: usize) -> Option<(usize, T)> {
        let alpha = self.basis.get(k);
        let ai = alpha.get(i);
        if ai == 0 {
            return None;
        }
        let target = alpha.shifted(i, -1)?.shifted(j, 1)?;
        let l = self.basis.position(&target)?;
        let value = (T::of_usize(ai as usize) * T::of_usize(target.get(j) as usize)).sqrt();
        Some((l, value))
    }

    /// `(K_ij)_kl`
    pub fn entry(&self, i: usize, j: usize, k: usize, l: usize) -> T {
        match self.row(i, j, k) {
            Some((col, v)) if col == l => v,
            _ => T::zero(),
        }
    }

    /// Non-zeros of block `K_ij` as `(k, l, value)` in increasing `k`.
    pub fn block(&self, i: usize, j: usize) -> Vec<(usize, usize, T)> {
        (0..self.basis.len())
            .filter_map(|k| self.row(i, j, k).map(|(l, v)| (k, l, v)))
            .collect()
    }

    /// Coefficients of `∂u/∂ξᵢ` in the order `P − 1` basis, one row per
    /// dimension.
    pub fn derivative_coefficients(&self, c: ArrayView1<T>) -> Result<Array2<T>> {
        if c.len() != self.basis.len() {
            return Err(PceError::DimensionMismatch {
                expected: self.basis.len(),
                got: c.len(),
            });
        }
        let mut out = Array2::zeros((self.dim(), self.lower_len));
        for (entries, &ck) in self.lowering.iter().zip(c) {
            if ck == T::zero() {
                continue;
            }
            for &(i, pos, f) in entries {
                out[[i as usize, pos as usize]] += f * ck;
            }
        }
        Ok(out)
    }
}

/// `G = E[∇u ∇uᵀ]` for a Hermite expansion.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientMatrix<T> {
    values: Array2<T>,
}

impl<T: Real> GradientMatrix<T> {
    /// Wraps a square matrix, symmetrising it.
    pub fn new(values: Array2<T>) -> Result<Self> {
        let n = values.nrows();
        if values.ncols() != n {
            return Err(PceError::DimensionMismatch {
                expected: n,
                got: values.ncols(),
            });
        }
        let half = T::lit(0.5);
        let sym = Array2::from_shape_fn((n, n), |(i, j)| (values[[i, j]] + values[[j, i]]) * half);
        Ok(Self { values: sym })
    }

    pub fn values(&self) -> &Array2<T> {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.nrows()
    }
}

/// `G_ij = cᵀ K_ij c`, computed once per unordered pair `i ≤ j`.
pub fn gradient_matrix<T: Real>(
    c: ArrayView1<T>,
    k: &StiffnessTensor<T>,
) -> Result<GradientMatrix<T>> {
    let g = k.derivative_coefficients(c)?;
    let d = k.dim();
    let mut values = Array2::zeros((d, d));
    for i in 0..d {
        for j in i..d {
            let v = g.row(i).dot(&g.row(j));
            values[[i, j]] = v;
            values[[j, i]] = v;
        }
    }
    Ok(GradientMatrix { values })
}
