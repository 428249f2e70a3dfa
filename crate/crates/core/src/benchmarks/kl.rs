//! Karhunen-Loève expansion of the exponential kernel `exp(−|x − x'|/l_c)`
//! on `[0, 1]`.

use crate::error::{PceError, Result};
use crate::scalar::Real;

const MAX_TERMS: usize = 200;
const BISECTION_STEPS: usize = 200;

/// Parity of an eigenfunction about the interval midpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Parity {
    Even,
    Odd,
}

#[derive(Clone, Copy, Debug)]
struct Mode<T> {
    omega: T,
    parity: Parity,
    norm: T,
}

/// The `d` leading eigenpairs of the exponential covariance kernel.
#[derive(Clone, Debug)]
pub struct KlExpansion<T> {
    correlation_length: T,
    eigenvalues: Vec<T>,
    modes: Vec<Mode<T>>,
}

/// Eigenpairs of `exp(−|x − x'|/l_c)` on `[0, 1]`.
///
/// With `x' = x − 1/2`, `a = 1/2` and `c = 1/l_c`, even modes `cos(ωx')`
/// solve `c cos(ωa) = ω sin(ωa)` and odd modes `sin(ωx')` solve
/// `ω cos(ωa) = −c sin(ωa)`. Each root is bracketed in an interval of width
/// `π/(2a)` and bisected; `λ = 2c/(ω² + c²)`.
pub fn kl_exponential<T: Real>(correlation_length: T, dim: usize) -> Result<KlExpansion<T>> {
    if !(correlation_length > T::zero()) || !correlation_length.is_finite() {
        return Err(PceError::InvalidArgument(
            "correlation length must be positive".into(),
        ));
    }
    if dim == 0 || dim > MAX_TERMS {
        return Err(PceError::InvalidArgument(format!(
            "KL dimension must lie in 1..={MAX_TERMS}, got {dim}"
        )));
    }
    let c = correlation_length.recip();
    let half = T::lit(0.5);
    let pi = T::PI();
    let mut modes = Vec::with_capacity(dim);
    let mut eigenvalues = Vec::with_capacity(dim);
    for index in 0..dim {
        // Roots alternate even, odd, even, ... with ωa in successive
        // brackets of width π/2.
        let k = index / 2;
        let (parity, lo, hi) = if index % 2 == 0 {
            let k = T::of_usize(k);
            (Parity::Even, k * pi / half, (k + half) * pi / half)
        } else {
            let k = T::of_usize(k + 1);
            (Parity::Odd, (k - half) * pi / half, k * pi / half)
        };
        let g = |w: T| match parity {
            Parity::Even => c * (w * half).cos() - w * (w * half).sin(),
            Parity::Odd => w * (w * half).cos() + c * (w * half).sin(),
        };
        let omega = bisect(g, lo, hi).ok_or(PceError::RootBracket { index })?;
        // sin(2ωa)/(2ω) with a = 1/2.
        let s = omega.sin() / (omega + omega);
        let sq = match parity {
            Parity::Even => half + s,
            Parity::Odd => half - s,
        };
        if !(sq > T::zero()) {
            return Err(PceError::RootBracket { index });
        }
        modes.push(Mode {
            omega,
            parity,
            norm: sq.sqrt().recip(),
        });
        eigenvalues.push((c + c) / (omega * omega + c * c));
    }
    Ok(KlExpansion {
        correlation_length,
        eigenvalues,
        modes,
    })
}

fn bisect<T: Real>(g: impl Fn(T) -> T, mut lo: T, mut hi: T) -> Option<T> {
    let mut glo = g(lo);
    let ghi = g(hi);
    if glo == T::zero() {
        return Some(lo);
    }
    if ghi == T::zero() {
        return Some(hi);
    }
    if glo.signum() == ghi.signum() {
        return None;
    }
    for _ in 0..BISECTION_STEPS {
        let mid = (lo + hi) * T::lit(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid);
        if gm == T::zero() {
            return Some(mid);
        }
        if gm.signum() == glo.signum() {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    Some((lo + hi) * T::lit(0.5))
}

impl<T: Real> KlExpansion<T> {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn correlation_length(&self) -> T {
        self.correlation_length
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    /// `Σ λ_i` over the retained terms; the full series sums to 1.
    pub fn captured_variance(&self) -> T {
        self.eigenvalues.iter().copied().sum()
    }

    /// Frequency `ω_i` of mode `i`.
    pub fn frequency(&self, i: usize) -> T {
        self.modes[i].omega
    }

    /// `φ_i(x)`, normalised in `L²(0, 1)`.
    pub fn eigenfunction(&self, i: usize, x: T) -> T {
        let m = &self.modes[i];
        let t = m.omega * (x - T::lit(0.5));
        match m.parity {
            Parity::Even => m.norm * t.cos(),
            Parity::Odd => m.norm * t.sin(),
        }
    }

    /// `Σ_i √λ_i φ_i(x) ξ_i`.
    pub fn field(&self, xi: &[T], x: T) -> T {
        xi.iter()
            .zip(&self.eigenvalues)
            .enumerate()
            .map(|(i, (&z, &l))| l.sqrt() * self.eigenfunction(i, x) * z)
            .fold(T::zero(), |a, b| a + b)
    }
}
