//! One-dimensional elliptic problem `−(a u')' = 1`, `u(0) = u(1) = 0`, with
//! a log-normal coefficient `a = a₀ + exp(σ Σ √λ_i φ_i ξ_i)`.

use crate::benchmarks::kl::{kl_exponential, KlExpansion};
use crate::error::{PceError, Result};
use crate::quadrature::gauss_legendre_rule;
use crate::scalar::{pairwise_sum, Real};

/// Default Gauss-Legendre panel count for the solution integrals.
pub const DEFAULT_PANELS: usize = 64;
const POINTS_PER_PANEL: usize = 10;

#[derive(Clone, Debug)]
pub struct EllipticProblem<T> {
    a0: T,
    sigma: T,
    point: T,
    kl: KlExpansion<T>,
    grid: EllipticGrid<T>,
}

/// Quadrature nodes on `[0, 1]` and `[0, x]` with the KL modes tabulated
/// at each node, so a solve costs one exponential per node.
#[derive(Clone, Debug)]
pub struct EllipticGrid<T> {
    point: T,
    full: Panelled<T>,
    partial: Panelled<T>,
}

#[derive(Clone, Debug)]
struct Panelled<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
    /// `√λ_i φ_i(node)`, node-major.
    modes: Vec<T>,
}

impl<T: Real> Panelled<T> {
    fn new(kl: &KlExpansion<T>, a: T, b: T, panels: usize) -> Result<Self> {
        let rule = gauss_legendre_rule::<T>(POINTS_PER_PANEL)?;
        let h = (b - a) / T::of_usize(panels);
        let half = h * T::lit(0.5);
        let mut nodes = Vec::with_capacity(panels * POINTS_PER_PANEL);
        let mut weights = Vec::with_capacity(panels * POINTS_PER_PANEL);
        for p in 0..panels {
            let mid = a + h * (T::of_usize(p) + T::lit(0.5));
            for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
                nodes.push(mid + half * x);
                weights.push(w * half);
            }
        }
        let d = kl.dim();
        let mut modes = Vec::with_capacity(nodes.len() * d);
        for &x in &nodes {
            for (i, &l) in kl.eigenvalues().iter().enumerate() {
                modes.push(l.sqrt() * kl.eigenfunction(i, x));
            }
        }
        Ok(Self {
            nodes,
            weights,
            modes,
        })
    }

    /// Reciprocal coefficient `1/a` at every node.
    fn inverse_coefficient(&self, a0: T, sigma: T, xi: &[T]) -> Result<Vec<T>> {
        let d = xi.len();
        self.nodes
            .iter()
            .zip(self.modes.chunks_exact(d))
            .map(|(&x, phi)| {
                let g = phi.iter().zip(xi).fold(T::zero(), |s, (&p, &z)| s + p * z);
                let a = a0 + (sigma * g).exp();
                if a > T::zero() && a.is_finite() {
                    Ok(a.recip())
                } else {
                    Err(PceError::NonPositiveCoefficient {
                        x: x.as_f64(),
                        value: a.as_f64(),
                    })
                }
            })
            .collect()
    }

    fn integrate(&self, f: impl Fn(usize, T) -> T) -> T {
        let terms: Vec<T> = self
            .nodes
            .iter()
            .zip(&self.weights)
            .enumerate()
            .map(|(k, (&x, &w))| w * f(k, x))
            .collect();
        pairwise_sum(&terms)
    }
}

impl<T: Real> EllipticGrid<T> {
    pub fn new(kl: &KlExpansion<T>, point: T, panels: usize) -> Result<Self> {
        if !(point >= T::zero() && point <= T::one()) {
            return Err(PceError::InvalidArgument(format!(
                "observation point {} outside [0, 1]",
                point.as_f64()
            )));
        }
        if panels == 0 {
            return Err(PceError::InvalidArgument(
                "panel count must be positive".into(),
            ));
        }
        Ok(Self {
            point,
            full: Panelled::new(kl, T::zero(), T::one(), panels)?,
            partial: Panelled::new(kl, T::zero(), point, panels)?,
        })
    }

    pub fn point(&self) -> T {
        self.point
    }
}

impl<T: Real> EllipticProblem<T> {
    /// Problem with `a₀ = 0.1`, `σ = 0.5`, `l_c = 0.2`, `d = 15`, `x* = 0.35`.
    pub fn standard() -> Result<Self> {
        Self::new(T::lit(0.1), T::lit(0.5), T::lit(0.2), 15, T::lit(0.35))
    }

    pub fn new(a0: T, sigma: T, correlation_length: T, dim: usize, point: T) -> Result<Self> {
        if !(a0 >= T::zero()) || !sigma.is_finite() {
            return Err(PceError::InvalidArgument(
                "a0 must be non-negative and sigma finite".into(),
            ));
        }
        let kl = kl_exponential(correlation_length, dim)?;
        let grid = EllipticGrid::new(&kl, point, DEFAULT_PANELS)?;
        Ok(Self {
            a0,
            sigma,
            point,
            kl,
            grid,
        })
    }

    pub fn dim(&self) -> usize {
        self.kl.dim()
    }

    pub fn kl(&self) -> &KlExpansion<T> {
        &self.kl
    }

    pub fn point(&self) -> T {
        self.point
    }

    /// Quadrature grid for observing `u(x)` with `panels` panels.
    pub fn grid(&self, x: T, panels: usize) -> Result<EllipticGrid<T>> {
        EllipticGrid::new(&self.kl, x, panels)
    }

    /// Diffusion coefficient `a(x; ξ)`.
    pub fn coefficient(&self, xi: &[T], x: T) -> T {
        self.a0 + (self.sigma * self.kl.field(xi, x)).exp()
    }

    /// `u(x*; ξ)` on the default grid.
    pub fn solve(&self, xi: &[T]) -> Result<T> {
        self.solve_on(xi, &self.grid)
    }

    /// `u(x; ξ)` with `x` and the resolution taken from `grid`.
    ///
    /// The flux `a(0)u'(0) = ∫y/a / ∫1/a` follows from `u(1) = 0`, then
    /// `u(x) = ∫₀ˣ (a(0)u'(0) − y)/a dy`.
    pub fn solve_on(&self, xi: &[T], grid: &EllipticGrid<T>) -> Result<T> {
        if xi.len() != self.dim() {
            return Err(PceError::DimensionMismatch {
                expected: self.dim(),
                got: xi.len(),
            });
        }
        let inv = grid.full.inverse_coefficient(self.a0, self.sigma, xi)?;
        let i0 = grid.full.integrate(|k, _| inv[k]);
        let i1 = grid.full.integrate(|k, y| y * inv[k]);
        let flux = i1 / i0;
        let inv = grid.partial.inverse_coefficient(self.a0, self.sigma, xi)?;
        Ok(grid.partial.integrate(|k, y| (flux - y) * inv[k]))
    }
}
