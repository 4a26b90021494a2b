//! Operator-splitting time integrators for linear and integro-differential
//! systems.
//!
//! The crate provides:
//!
//! - [`linalg`]: dense matrices/vectors, the matrix exponential, and
//!   exponential propagators (homogeneous and variation-of-constants);
//! - [`quadrature`]: closed Newton-Cotes rules and composite integration;
//! - [`schemes`]: sequential (Lie), symmetrically weighted sequential,
//!   Strang-Marchuk and iterative splitting integrators, with their
//!   local-error leading terms;
//! - [`models`]: the concrete test problems: a scalar integro-differential
//!   example with a closed-form solution, Newton-Cotes closures of
//!   `u' = int u`, and a semi-discretized 1D transport system with two
//!   memory-term closures;
//! - [`analysis`]: error measurement, observed-order estimation,
//!   leading-term fits and semigroup growth-bound checks.
//!
//! All operations are pure functions of immutable inputs; independent runs
//! can execute concurrently without shared state.

pub mod analysis;
pub mod error;
pub mod linalg;
pub mod models;
pub mod quadrature;
pub mod rng;
pub mod schemes;

pub use error::{Result, SplitError};
