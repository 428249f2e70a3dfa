//! Sparse Hermite polynomial chaos expansions recovered by compressive
//! sensing, with iterative rotations of the Gaussian inputs.
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the precision. The experiment harness runs in `f64`.

// `!(x > 0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod benchmarks;
pub mod error;
pub mod harness;
pub mod hermite;
pub mod linalg;
pub mod model;
pub mod quadrature;
pub mod rotation;
pub mod scalar;
pub mod solvers;

pub use error::{PceError, Result};
pub use scalar::Real;

pub type PceModel64 = model::PceModel<f64>;
pub type PceModel32 = model::PceModel<f32>;
pub type SampleSet64 = hermite::SampleSet<f64>;
pub type SampleSet32 = hermite::SampleSet<f32>;
pub type MeasurementMatrix64 = hermite::MeasurementMatrix<f64>;
pub type MeasurementMatrix32 = hermite::MeasurementMatrix<f32>;
pub type SparseGrid64 = quadrature::SparseGridRule<f64>;
pub type SparseGrid32 = quadrature::SparseGridRule<f32>;
pub type Solver64 = solvers::Solver<f64>;
pub type Solver32 = solvers::Solver<f32>;
pub type SolverReport64 = solvers::SolverReport<f64>;
pub type SolverReport32 = solvers::SolverReport<f32>;
pub type RotationMatrix64 = rotation::RotationMatrix<f64>;
pub type RotationMatrix32 = rotation::RotationMatrix<f32>;
pub type StiffnessTensor64 = rotation::StiffnessTensor<f64>;
pub type StiffnessTensor32 = rotation::StiffnessTensor<f32>;
pub type RotationConfig64 = rotation::RotationConfig<f64>;
pub type RotationConfig32 = rotation::RotationConfig<f32>;
pub type KlExpansion64 = benchmarks::KlExpansion<f64>;
pub type KlExpansion32 = benchmarks::KlExpansion<f32>;
