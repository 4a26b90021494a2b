//! Concrete test problems: a scalar integro-differential example with a
//! closed-form solution, the Newton-Cotes closures of `u' = int_0^t u`, and
//! a semi-discretized 1D transport system with two memory-term closures.

mod closures;
mod transport;

pub use closures::{
    simpson_closure_series, simpson_closure_series_exact, trapezoid_closure_exact, Rational,
};
pub use transport::{
    build_transport_matrices, build_transport_matrices_signed, gaussian_bump, memory_case1_b,
    memory_case2_b, reference_solution, run_transport_iterative, MemoryClosure, MemorySource,
    TransportConfig, TransportSigns,
};

use crate::error::{Result, SplitError};
use crate::linalg::{DenseMatrix, TimeGrid, Vector};
use crate::schemes::{OperatorB, SplitProblem};

/// Exact solution `exp(t + t^2/2) c0` of the scalar model
/// `c' = c + t c`, the first-order moment closure of `c' = c + int_0^t c`.
pub fn example1_exact(t: f64, c0: f64) -> f64 {
    (t + 0.5 * t * t).exp() * c0
}

/// The scalar example problem: split `c' = (1 + t) c` into the constant
/// part `A = 1` and the time-dependent part `B(t) = t`.
#[derive(Debug, Clone, Copy)]
pub struct Example1Problem {
    pub c0: f64,
    pub t_end: f64,
}

impl Example1Problem {
    pub fn new(c0: f64, t_end: f64) -> Result<Self> {
        if !c0.is_finite() {
            return Err(SplitError::NonFinite("initial value".into()));
        }
        if !(t_end.is_finite() && t_end > 0.0) {
            return Err(SplitError::Domain(format!(
                "t_end must be positive, got {t_end}"
            )));
        }
        Ok(Self { c0, t_end })
    }

    pub fn exact(&self, t: f64) -> f64 {
        example1_exact(t, self.c0)
    }

    /// The corresponding [`SplitProblem`] on `n_steps` uniform steps.
    pub fn split_problem(&self, n_steps: usize) -> Result<SplitProblem> {
        SplitProblem::new(
            DenseMatrix::from_diagonal(&[1.0]),
            OperatorB::time_dependent(|t| DenseMatrix::from_diagonal(&[t])),
            Vector::from(vec![self.c0]),
            TimeGrid::new(0.0, self.t_end, n_steps)?,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example1_exact_values() {
        assert_eq!(example1_exact(0.0, 3.0), 3.0);
        assert!((example1_exact(1.0, 1.0) - 1.5f64.exp()).abs() < 1e-12);
        assert!((example1_exact(1.0, 1.0) - 4.481689).abs() < 1e-6);
        assert!((example1_exact(0.5, 2.0) - 2.0 * 0.625f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn example1_satisfies_its_ode() {
        // centered finite differences: |c' - (1+t) c| stays small
        let h = 1e-5;
        for i in 0..50 {
            let t = 0.02 * i as f64 + 0.01;
            let deriv = (example1_exact(t + h, 1.0) - example1_exact(t - h, 1.0)) / (2.0 * h);
            let rhs = (1.0 + t) * example1_exact(t, 1.0);
            assert!(
                (deriv - rhs).abs() < 1e-4 * rhs.abs().max(1.0),
                "residual too large at t={t}"
            );
        }
    }

    #[test]
    fn split_problem_shape() {
        let p = Example1Problem::new(1.0, 1.0)
            .unwrap()
            .split_problem(4)
            .unwrap();
        assert_eq!(p.a().rows(), 1);
        assert_eq!(p.grid().n_steps(), 4);
        assert_eq!(p.b().eval(0.7).get(0, 0), 0.7);
    }
}
