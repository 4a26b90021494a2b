//! Error type shared across the crate.

use std::fmt;

/// Errors produced by construction and by the numerical operations.
#[derive(Debug, Clone, PartialEq)]
pub enum SplitError {
    /// Operand shapes are incompatible (non-square input, length mismatch, ...).
    Dimension(String),
    /// A value that must be finite was NaN or infinite.
    NonFinite(String),
    /// An argument is outside the operation's domain (e.g. reversed interval).
    Domain(String),
    /// The requested combination of operators is not supported
    /// (time-dependent non-diagonal operator in an exponentiated slot).
    UnsupportedOperator(String),
    /// An iteration or integration blew up; names the offending subsystem.
    Divergence(String),
    /// A linear solve hit a (numerically) singular matrix.
    Singular,
    /// A trajectory was queried outside the interval it covers.
    HistoryOutOfRange { t: f64, start: f64, end: f64 },
    /// Error raised while marching a time grid, with the step index attached.
    AtStep {
        step: usize,
        source: Box<SplitError>,
    },
}

impl fmt::Display for SplitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SplitError::Dimension(msg) => write!(f, "dimension error: {msg}"),
            SplitError::NonFinite(msg) => write!(f, "non-finite value: {msg}"),
            SplitError::Domain(msg) => write!(f, "domain error: {msg}"),
            SplitError::UnsupportedOperator(msg) => write!(f, "unsupported operator: {msg}"),
            SplitError::Divergence(msg) => write!(f, "divergence in {msg}"),
            SplitError::Singular => write!(f, "singular linear system"),
            SplitError::HistoryOutOfRange { t, start, end } => write!(
                f,
                "trajectory queried at t = {t} outside covered interval [{start}, {end}]"
            ),
            SplitError::AtStep { step, source } => write!(f, "at time step {step}: {source}"),
        }
    }
}

impl std::error::Error for SplitError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            SplitError::AtStep { source, .. } => Some(source.as_ref()),
            _ => None,
        }
    }
}

impl SplitError {
    /// Attach a step index to an error raised inside a grid march.
    pub fn at_step(self, step: usize) -> Self {
        SplitError::AtStep {
            step,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, SplitError>;
