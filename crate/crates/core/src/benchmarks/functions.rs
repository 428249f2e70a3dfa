//! Closed-form quantities of interest.

use ndarray::{Array1, ArrayView1};
use rand::Rng;

use crate::error::{PceError, Result};
use crate::scalar::Real;

/// Dimension of the high-dimensional test function.
pub const HIGHDIM_DIM: usize = 100;

/// `s + 0.25 s² + 0.025 s³` with `s = Σ ξ_i`. Every direction matters
/// equally in the original variables, but the function depends only on
/// `η₁ = s/√d`.
pub fn qoi_equal_importance<T: Real>(xi: ArrayView1<T>) -> T {
    let s = xi.sum();
    s + T::lit(0.25) * s * s + T::lit(0.025) * s * s * s
}

/// `Σ ξ_i + 0.25 (Σ ξ_i/√i)²` for a 100-vector.
pub fn qoi_highdim<T: Real>(xi: ArrayView1<T>) -> Result<T> {
    if xi.len() != HIGHDIM_DIM {
        return Err(PceError::DimensionMismatch {
            expected: HIGHDIM_DIM,
            got: xi.len(),
        });
    }
    let mut s = T::zero();
    let mut w = T::zero();
    for (i, &x) in xi.iter().enumerate() {
        s += x;
        w += x / T::of_usize(i + 1).sqrt();
    }
    Ok(s + T::lit(0.25) * w * w)
}

/// Compressible coefficients `c_n = ζ_n / n^1.5` with `ζ_n ~ U[−1, 1]`,
/// `n` counted from 1.
pub fn compressible_coefficients<T: Real>(len: usize, rng: &mut impl Rng) -> Array1<T> {
    Array1::from_shape_fn(len, |k| {
        let zeta: f64 = rng.gen_range(-1.0..=1.0);
        T::lit(zeta / ((k + 1) as f64).powf(1.5))
    })
}
