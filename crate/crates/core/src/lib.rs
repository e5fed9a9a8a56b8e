//! Sensor selection and scheduling for linear measurement networks.
//!
//! A network of `m` sensors takes linear measurements `y = A x + n` of an
//! unknown of size `n`. This crate decides which sensors to activate, either
//! once (placement) or at each of `T` time instances (scheduling), so that
//! the estimation accuracy stays below a user threshold while energy and
//! communication costs stay balanced.
//!
//! The crate is organised in five modules:
//!
//! * [`netmodel`] — network/measurement data types, accuracy metrics
//!   (trace-inverse MSE, worst-case error, log-det volume), tight-frame
//!   generators and cost models.
//! * [`spectral`] — closed-form expected-performance formulas for tight
//!   frames, eigenvalue interlacing and rank-one update bounds. Used both as
//!   analytics and as oracles for everything else.
//! * [`solver`] — a log-barrier interior-point solver for one relaxed
//!   scheduling subproblem (weighted ℓ1 objective, per-instant accuracy
//!   constraints, coverage, box and energy constraints).
//! * [`scheduler`] — the iteratively reweighted ℓ1 outer loop producing a
//!   binary scheduling table from repeated relaxed solves.
//! * [`baselines`] — greedy, random and exhaustive reference methods.
//!
//! Matrix scalar handling: the closed-form math layers are generic over
//! [`Real`] (`f32` or `f64`); the iterative solver and scheduler work on the
//! `f64` aliases [`Matrix`] and [`Vector`] since their convergence tolerances
//! are calibrated well below `f32` precision.

use std::iter::Sum;

use ndarray::{Array1, Array2, ScalarOperand};
use ndarray_linalg::{Lapack, Scalar};
use num_traits::{Float, NumAssign};

pub mod baselines;
pub mod netmodel;
pub mod scheduler;
pub mod solver;
pub mod spectral;

mod error;

pub use error::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Scalar type the dense math layer is generic over.
///
/// Implemented for `f32` and `f64`; `Lapack` brings in the backing
/// eigenvalue/SVD/Cholesky routines.
pub trait Real:
    Float + NumAssign + Scalar<Real = Self> + Lapack + ScalarOperand + Sum + Send + Sync + 'static
{
}

impl<T> Real for T where
    T: Float + NumAssign + Scalar<Real = Self> + Lapack + ScalarOperand + Sum + Send + Sync + 'static
{
}

/// Dense matrix in the working precision of the solver and scheduler.
pub type Matrix = Array2<f64>;
/// Dense vector in the working precision of the solver and scheduler.
pub type Vector = Array1<f64>;
