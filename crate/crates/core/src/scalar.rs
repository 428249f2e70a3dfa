//! Floating-point abstraction shared by every numerical routine in the crate.

use ndarray::NdFloat;
use num_traits::{FloatConst, NumCast};
use std::iter::Sum;

/// Real scalar used throughout the library (`f32` or `f64`).
pub trait Real: NdFloat + FloatConst + Sum + for<'a> Sum<&'a Self> + Default {
    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as NumCast>::from(x).expect("f64 literal representable")
    }

    #[inline]
    fn of_usize(n: usize) -> Self {
        <Self as NumCast>::from(n).expect("usize representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    /// Tolerance floor that tracks the working precision: `max(tol, 100·eps)`.
    #[inline]
    fn tol_floor(tol: f64) -> Self {
        Self::lit(tol).max(Self::epsilon() * Self::lit(100.0))
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Pairwise (tree) summation. Deterministic for a given input order and more
/// accurate than a running sum for long vectors.
pub fn pairwise_sum<T: Real>(values: &[T]) -> T {
    const BLOCK: usize = 32;
    if values.len() <= BLOCK {
        values.iter().copied().fold(T::zero(), |a, b| a + b)
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}

pub(crate) fn norm2<T: Real>(v: ndarray::ArrayView1<T>) -> T {
    v.dot(&v).sqrt()
}
