//! Korteweg-de Vries soliton with time-dependent additive noise, observed at
//! `(x, t) = (6, 1)`.

use crate::benchmarks::kl::{kl_exponential, KlExpansion};
use crate::error::{PceError, Result};
use crate::quadrature::{composite_integral, gauss_legendre_rule};
use crate::scalar::Real;

const PANELS: usize = 64;

#[derive(Clone, Debug)]
pub struct KdvProblem<T> {
    sigma: T,
    kl: KlExpansion<T>,
    linear: Vec<T>,
    shift: Vec<T>,
}

/// `A_i = √λ_i ∫₀¹ φ_i` and `B_i = √λ_i ∫₀¹ ∫₀ᶻ φ_i = √λ_i ∫₀¹ (1 − y) φ_i`.
fn soliton_coefficients<T: Real>(kl: &KlExpansion<T>, panels: usize) -> Result<(Vec<T>, Vec<T>)> {
    let rule = gauss_legendre_rule::<T>(10)?;
    let mut a = Vec::with_capacity(kl.dim());
    let mut b = Vec::with_capacity(kl.dim());
    for (i, &l) in kl.eigenvalues().iter().enumerate() {
        let s = l.sqrt();
        a.push(
            s * composite_integral(&rule, T::zero(), T::one(), panels, |y| {
                kl.eigenfunction(i, y)
            }),
        );
        b.push(
            s * composite_integral(&rule, T::zero(), T::one(), panels, |y| {
                (T::one() - y) * kl.eigenfunction(i, y)
            }),
        );
    }
    Ok((a, b))
}

impl<T: Real> KdvProblem<T> {
    /// Problem with `σ = 0.1`, `l_c = 0.25`, `d = 10`.
    pub fn standard() -> Result<Self> {
        Self::new(T::lit(0.1), T::lit(0.25), 10)
    }

    pub fn new(sigma: T, correlation_length: T, dim: usize) -> Result<Self> {
        if !sigma.is_finite() {
            return Err(PceError::InvalidArgument("sigma must be finite".into()));
        }
        let kl = kl_exponential(correlation_length, dim)?;
        let (linear, shift) = soliton_coefficients(&kl, PANELS)?;
        Ok(Self {
            sigma,
            kl,
            linear,
            shift,
        })
    }

    pub fn dim(&self) -> usize {
        self.kl.dim()
    }

    pub fn kl(&self) -> &KlExpansion<T> {
        &self.kl
    }

    /// The `A_i`.
    pub fn linear_coefficients(&self) -> &[T] {
        &self.linear
    }

    /// The `B_i`.
    pub fn shift_coefficients(&self) -> &[T] {
        &self.shift
    }

    /// Largest change in any `A_i`, `B_i` when the quadrature panels double.
    pub fn coefficient_drift(&self) -> Result<T> {
        let (a, b) = soliton_coefficients(&self.kl, 2 * PANELS)?;
        Ok(a.iter()
            .zip(&self.linear)
            .chain(b.iter().zip(&self.shift))
            .fold(T::zero(), |m, (x, y)| m.max((*x - *y).abs())))
    }

    /// `σ Σ A_i ξ_i − 2 sech²(2 + 6σ Σ B_i ξ_i)`.
    pub fn solve(&self, xi: &[T]) -> Result<T> {
        if xi.len() != self.dim() {
            return Err(PceError::DimensionMismatch {
                expected: self.dim(),
                got: xi.len(),
            });
        }
        let dot = |c: &[T]| c.iter().zip(xi).fold(T::zero(), |s, (&a, &z)| s + a * z);
        let w = self.sigma * dot(&self.linear);
        let arg = T::lit(2.0) + T::lit(6.0) * self.sigma * dot(&self.shift);
        let sech = arg.cosh().recip();
        Ok(w - T::lit(2.0) * sech * sech)
    }
}
