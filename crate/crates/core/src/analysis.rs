//! Error measurement, observed-order estimation, leading-term fits and
//! semigroup growth-bound checks.

use crate::error::{Result, SplitError};
use crate::linalg::TimeGrid;
use crate::linalg::{expm, log_norm_inf, DenseMatrix, Vector};
use crate::schemes::{
    lie_local_error_leading, lie_step, strang_local_error_leading, strang_step, OperatorB,
    SplitProblem, Trajectory,
};

/// Errors below this floor are treated as exact when fitting orders.
pub const ROUNDING_FLOOR: f64 = 1e-12;

/// Norm used for error measurements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Norm {
    /// Maximum absolute component.
    Inf,
    /// `sqrt(dx) ||.||_2`, the grid-weighted Euclidean norm.
    L2Weighted { dx: f64 },
}

impl Norm {
    pub fn label(&self) -> &'static str {
        match self {
            Norm::Inf => "inf",
            Norm::L2Weighted { .. } => "l2-weighted",
        }
    }

    pub fn of(&self, v: &Vector) -> f64 {
        match self {
            Norm::Inf => v.norm_inf(),
            Norm::L2Weighted { dx } => dx.sqrt() * v.norm_l2(),
        }
    }
}

/// One measured error cell: scheme, step size, iteration count and error.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRecord {
    pub scheme: String,
    pub dt: f64,
    pub iterations: usize,
    pub error: f64,
    pub norm: &'static str,
}

/// Result of an observed-order fit.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderEstimate {
    pub scheme: String,
    pub observed_order: f64,
    pub pairs_used: usize,
}

/// Outcome of [`observed_order`]: either a fitted order or the information
/// that the errors sit at the rounding floor (the scheme is exact here).
#[derive(Debug, Clone, PartialEq)]
pub enum OrderOutcome {
    Exact,
    Estimate(OrderEstimate),
}

fn check_same_sampling(a: &Trajectory, b: &Trajectory) -> Result<()> {
    if a.times().len() != b.times().len() {
        return Err(SplitError::Dimension(format!(
            "mismatched sampling: {} vs {} samples",
            a.times().len(),
            b.times().len()
        )));
    }
    let scale = 1.0 + a.end_time().abs();
    for (x, y) in a.times().iter().zip(b.times()) {
        if (x - y).abs() > 1e-9 * scale {
            return Err(SplitError::Dimension(format!(
                "mismatched sampling: times {x} vs {y}"
            )));
        }
    }
    if a.states()[0].len() != b.states()[0].len() {
        return Err(SplitError::Dimension(
            "mismatched sampling: state lengths differ".into(),
        ));
    }
    Ok(())
}

/// Norm of the final-time difference between two equally sampled
/// trajectories.
pub fn error_vs_reference(approx: &Trajectory, reference: &Trajectory, norm: &Norm) -> Result<f64> {
    check_same_sampling(approx, reference)?;
    Ok(norm.of(&approx.final_state().sub(reference.final_state())))
}

/// Maximum over all shared sample times of the state difference; the
/// full-trajectory alternative to the final-time measurement.
pub fn error_vs_reference_max(
    approx: &Trajectory,
    reference: &Trajectory,
    norm: &Norm,
) -> Result<f64> {
    check_same_sampling(approx, reference)?;
    Ok(approx
        .states()
        .iter()
        .zip(reference.states())
        .map(|(a, b)| norm.of(&a.sub(b)))
        .fold(0.0, f64::max))
}

/// Mean of `log2(e(dt) / e(dt/2))` over consecutive pairs of a
/// step-halving error sequence. Pairs touching the rounding floor are
/// dropped; if none survive the scheme is reported exact.
pub fn observed_order(scheme: &str, samples: &[(f64, f64)]) -> Result<OrderOutcome> {
    if samples.len() < 2 {
        return Err(SplitError::Domain(
            "order estimation needs at least two (dt, error) samples".into(),
        ));
    }
    for w in samples.windows(2) {
        let (dt_prev, dt_next) = (w[0].0, w[1].0);
        let halves =
            dt_next.is_finite() && dt_next > 0.0 && (dt_prev / dt_next - 2.0).abs() <= 1e-6;
        if !halves {
            return Err(SplitError::Domain(format!(
                "samples must halve dt: got {dt_prev} then {dt_next}"
            )));
        }
    }
    let mut ratios = Vec::new();
    for w in samples.windows(2) {
        let (e_coarse, e_fine) = (w[0].1, w[1].1);
        if e_coarse < ROUNDING_FLOOR || e_fine < ROUNDING_FLOOR {
            continue;
        }
        ratios.push((e_coarse / e_fine).log2());
    }
    if ratios.is_empty() {
        return Ok(OrderOutcome::Exact);
    }
    Ok(OrderOutcome::Estimate(OrderEstimate {
        scheme: scheme.to_string(),
        observed_order: ratios.iter().sum::<f64>() / ratios.len() as f64,
        pairs_used: ratios.len(),
    }))
}

/// Which scheme's leading error term to fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeadingTermScheme {
    Lie,
    Strang,
}

/// Result of [`leading_term_fit`].
#[derive(Debug, Clone, PartialEq)]
pub enum LeadingTermFit {
    /// The predicted term vanishes (commuting operators); the scheme is
    /// exact and there is nothing to fit.
    Exact,
    Fit {
        /// Multiplicative constant of the regression of the one-step defect
        /// against the predicted leading term; 1 when the theory matches.
        constant: f64,
        /// Observed convergence order of the residual after subtracting the
        /// predicted term.
        residual_order: f64,
    },
}

/// Regress the one-step defect `exp(tau (A+B)) c - scheme(tau) c` against
/// the predicted leading term over a decreasing list of step sizes.
pub fn leading_term_fit(
    scheme: LeadingTermScheme,
    a: &DenseMatrix,
    b: &DenseMatrix,
    c: &Vector,
    dts: &[f64],
) -> Result<LeadingTermFit> {
    if dts.len() < 2 {
        return Err(SplitError::Domain(
            "leading-term fit needs at least two step sizes".into(),
        ));
    }
    let decreasing_positive =
        dts.windows(2).all(|w| w[1] < w[0]) && dts.iter().all(|&t| t.is_finite() && t > 0.0);
    if !decreasing_positive {
        return Err(SplitError::Domain(
            "step sizes must be positive and strictly decreasing".into(),
        ));
    }
    let sum = a.add(b);
    let mut constants = Vec::new();
    let mut residuals = Vec::new();
    for &tau in dts {
        let grid = TimeGrid::new(0.0, tau, 1)?;
        let p = SplitProblem::new(a.clone(), OperatorB::constant(b.clone()), c.clone(), grid)?;
        let stepped = match scheme {
            LeadingTermScheme::Lie => lie_step(&p, c, 0)?,
            LeadingTermScheme::Strang => strang_step(&p, c, 0)?,
        };
        let exact = expm(&sum.scale(tau))?.matvec(c);
        let defect = exact.sub(&stepped);
        // predicted one-step defect = tau * leading error density
        let predicted = match scheme {
            LeadingTermScheme::Lie => lie_local_error_leading(a, b, c, tau)?,
            LeadingTermScheme::Strang => strang_local_error_leading(a, b, c, tau)?,
        }
        .scale(tau);
        let denom: f64 = predicted.entries().iter().map(|x| x * x).sum();
        if denom == 0.0 {
            return Ok(LeadingTermFit::Exact);
        }
        let inner: f64 = defect
            .entries()
            .iter()
            .zip(predicted.entries())
            .map(|(d, p)| d * p)
            .sum();
        constants.push(inner / denom);
        residuals.push(defect.sub(&predicted).norm_inf());
    }
    let constant = constants.iter().sum::<f64>() / constants.len() as f64;
    // residual order from consecutive dt ratios (not necessarily halving)
    let mut orders = Vec::new();
    for (w, r) in dts.windows(2).zip(residuals.windows(2)) {
        if r[0] < ROUNDING_FLOOR || r[1] < ROUNDING_FLOOR {
            continue;
        }
        orders.push((r[0] / r[1]).ln() / (w[0] / w[1]).ln());
    }
    let residual_order = if orders.is_empty() {
        f64::INFINITY
    } else {
        orders.iter().sum::<f64>() / orders.len() as f64
    };
    Ok(LeadingTermFit::Fit {
        constant,
        residual_order,
    })
}

/// Result of a growth-bound verification.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthBoundReport {
    /// True when `||exp(tM)||_inf <= exp(t mu_inf(M)) + 1e-10` at every
    /// sampled time. A violation here indicates a matrix-exponential bug,
    /// since the bound is a theorem in this norm.
    pub holds: bool,
    /// Largest value of `||exp(tM)|| - exp(t mu)` over the samples
    /// (negative when the bound holds with margin).
    pub max_slack: f64,
    /// Time at which the slack is attained.
    pub worst_t: f64,
}

/// Tolerance added to the growth bound to absorb rounding.
pub const GROWTH_BOUND_TOLERANCE: f64 = 1e-10;

/// Check the semigroup growth estimate
/// `||exp(tM)||_inf <= exp(t mu_inf(M))` at the given times.
pub fn growth_bound_check(m: &DenseMatrix, times: &[f64]) -> Result<GrowthBoundReport> {
    let mu = log_norm_inf(m)?;
    let mut max_slack = f64::NEG_INFINITY;
    let mut worst_t = f64::NAN;
    for &t in times {
        if !(t.is_finite() && t >= 0.0) {
            return Err(SplitError::Domain(format!(
                "growth bound times must be nonnegative, got {t}"
            )));
        }
        let norm = expm(&m.scale(t))?.norm_inf();
        let slack = norm - (t * mu).exp();
        if slack > max_slack {
            max_slack = slack;
            worst_t = t;
        }
    }
    Ok(GrowthBoundReport {
        holds: max_slack <= GROWTH_BOUND_TOLERANCE,
        max_slack,
        worst_t,
    })
}
