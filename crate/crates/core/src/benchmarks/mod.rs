//! Benchmark quantities of interest with exact evaluators.

mod elliptic;
mod functions;
mod kdv;
mod kl;

pub use elliptic::{EllipticGrid, EllipticProblem, DEFAULT_PANELS};
pub use functions::{compressible_coefficients, qoi_equal_importance, qoi_highdim, HIGHDIM_DIM};
pub use kdv::KdvProblem;
pub use kl::{kl_exponential, KlExpansion};

use std::borrow::Cow;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use ndarray::ArrayView1;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{PceError, Result};
use crate::hermite::MultiIndexSet;
use crate::model::PceModel;
use crate::scalar::Real;

/// Named benchmark problems.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    EqualImportance,
    Compressible,
    Elliptic,
    Kdv,
    Highdim,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 5] = [
        ProblemKind::EqualImportance,
        ProblemKind::Compressible,
        ProblemKind::Elliptic,
        ProblemKind::Kdv,
        ProblemKind::Highdim,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::EqualImportance => "equal-importance",
            ProblemKind::Compressible => "compressible",
            ProblemKind::Elliptic => "elliptic",
            ProblemKind::Kdv => "kdv",
            ProblemKind::Highdim => "highdim",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ProblemKind::EqualImportance => "s + s²/4 + s³/40 with s the sum of all inputs",
            ProblemKind::Compressible => "random expansion with coefficients ζ/n^1.5",
            ProblemKind::Elliptic => "1D diffusion with log-normal coefficient, u(0.35)",
            ProblemKind::Kdv => "stochastically forced KdV soliton, u(6, 1)",
            ProblemKind::Highdim => "Σξ_i + (Σξ_i/√i)²/4 in 100 dimensions",
        }
    }

    /// Input dimension used by default.
    pub fn default_dim(self) -> usize {
        match self {
            ProblemKind::EqualImportance | ProblemKind::Compressible => 12,
            ProblemKind::Elliptic => 15,
            ProblemKind::Kdv => 10,
            ProblemKind::Highdim => HIGHDIM_DIM,
        }
    }

    /// Polynomial order used by default.
    pub fn default_order(self) -> u32 {
        match self {
            ProblemKind::Kdv => 4,
            ProblemKind::Highdim => 2,
            _ => 3,
        }
    }

    /// Sparse-grid level of the error metric.
    pub fn error_level(self) -> usize {
        match self {
            ProblemKind::EqualImportance | ProblemKind::Compressible => 4,
            ProblemKind::Elliptic | ProblemKind::Kdv => 6,
            ProblemKind::Highdim => 3,
        }
    }

    /// Whether the problem draws random data of its own (besides the inputs).
    pub fn is_random(self) -> bool {
        self == ProblemKind::Compressible
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemKind {
    type Err = PceError;

    fn from_str(s: &str) -> Result<Self> {
        ProblemKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| PceError::UnknownProblem(s.to_string()))
    }
}

/// A concrete problem instance ready to evaluate.
#[derive(Clone, Debug)]
pub enum Problem<T> {
    EqualImportance { dim: usize },
    Compressible(PceModel<T>),
    Elliptic(EllipticProblem<T>),
    Kdv(KdvProblem<T>),
    Highdim,
}

impl<T: Real> Problem<T> {
    /// Instantiates `kind` for `basis`. Only the compressible problem
    /// consumes `rng`.
    pub fn build(
        kind: ProblemKind,
        basis: &Arc<MultiIndexSet>,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        let dim = basis.dim();
        Ok(match kind {
            ProblemKind::EqualImportance => Problem::EqualImportance { dim },
            ProblemKind::Compressible => {
                let c = compressible_coefficients(basis.len(), rng);
                Problem::Compressible(PceModel::new(basis.clone(), c)?)
            }
            ProblemKind::Elliptic => Problem::Elliptic(EllipticProblem::new(
                T::lit(0.1),
                T::lit(0.5),
                T::lit(0.2),
                dim,
                T::lit(0.35),
            )?),
            ProblemKind::Kdv => Problem::Kdv(KdvProblem::new(T::lit(0.1), T::lit(0.25), dim)?),
            ProblemKind::Highdim => {
                if dim != HIGHDIM_DIM {
                    return Err(PceError::DimensionMismatch {
                        expected: HIGHDIM_DIM,
                        got: dim,
                    });
                }
                Problem::Highdim
            }
        })
    }

    pub fn kind(&self) -> ProblemKind {
        match self {
            Problem::EqualImportance { .. } => ProblemKind::EqualImportance,
            Problem::Compressible(_) => ProblemKind::Compressible,
            Problem::Elliptic(_) => ProblemKind::Elliptic,
            Problem::Kdv(_) => ProblemKind::Kdv,
            Problem::Highdim => ProblemKind::Highdim,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Problem::EqualImportance { dim } => *dim,
            Problem::Compressible(m) => m.dim(),
            Problem::Elliptic(p) => p.dim(),
            Problem::Kdv(p) => p.dim(),
            Problem::Highdim => HIGHDIM_DIM,
        }
    }

    /// Exact expansion coefficients, when the problem is itself an expansion.
    pub fn exact_coefficients(&self) -> Option<ArrayView1<'_, T>> {
        match self {
            Problem::Compressible(m) => Some(m.coefficients()),
            _ => None,
        }
    }

    pub fn eval(&self, xi: ArrayView1<T>) -> Result<T> {
        if xi.len() != self.dim() {
            return Err(PceError::DimensionMismatch {
                expected: self.dim(),
                got: xi.len(),
            });
        }
        let slice = || match xi.as_slice() {
            Some(s) => Cow::Borrowed(s),
            None => Cow::Owned(xi.to_vec()),
        };
        match self {
            Problem::EqualImportance { .. } => Ok(qoi_equal_importance(xi)),
            Problem::Compressible(m) => m.eval(xi),
            Problem::Elliptic(p) => p.solve(&slice()),
            Problem::Kdv(p) => p.solve(&slice()),
            Problem::Highdim => qoi_highdim(xi),
        }
    }
}
