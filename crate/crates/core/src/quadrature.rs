//! Closed Newton-Cotes rules and composite integration.
//!
//! The four supported rules (trapezoid, Simpson, Simpson 3/8, Boole) are the
//! ones needed to close memory integrals and variation-of-constants terms.
//! Weights are stored normalized so that they sum to 1 over an interval; the
//! error order is kept as metadata and verified empirically by the observed
//! composite convergence order, since the usual xi-form remainder is not
//! computable.

use crate::error::{Result, SplitError};
use crate::linalg::Vector;

/// A closed Newton-Cotes rule on `degree + 1` equally spaced nodes
/// `x_i = a + i (b - a) / degree`, including both endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    degree: usize,
    name: &'static str,
    weights: Vec<f64>,
    error_order: u32,
}

impl QuadratureRule {
    #[inline]
    pub fn degree(&self) -> usize {
        self.degree
    }

    #[inline]
    pub fn name(&self) -> &'static str {
        self.name
    }

    /// Normalized node weights (they sum to 1).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Exponent of the interval width in the single-interval error term.
    #[inline]
    pub fn error_order(&self) -> u32 {
        self.error_order
    }

    /// Largest polynomial degree integrated exactly on one interval.
    #[inline]
    pub fn degree_of_exactness(&self) -> usize {
        match self.degree {
            1 => 1,
            2 | 3 => 3,
            4 => 5,
            _ => unreachable!(),
        }
    }

    pub fn trapezoid() -> Self {
        rule_coefficients(1).expect("degree 1 is supported")
    }

    pub fn simpson() -> Self {
        rule_coefficients(2).expect("degree 2 is supported")
    }

    pub fn simpson38() -> Self {
        rule_coefficients(3).expect("degree 3 is supported")
    }

    pub fn boole() -> Self {
        rule_coefficients(4).expect("degree 4 is supported")
    }
}

/// The closed Newton-Cotes rule of the given degree (1 through 4).
pub fn rule_coefficients(degree: usize) -> Result<QuadratureRule> {
    let (name, weights, error_order): (&'static str, Vec<f64>, u32) = match degree {
        1 => ("trapezoid", vec![1.0 / 2.0, 1.0 / 2.0], 3),
        2 => ("simpson", vec![1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0], 5),
        3 => (
            "simpson38",
            vec![1.0 / 8.0, 3.0 / 8.0, 3.0 / 8.0, 1.0 / 8.0],
            5,
        ),
        4 => (
            "boole",
            vec![
                7.0 / 90.0,
                32.0 / 90.0,
                12.0 / 90.0,
                32.0 / 90.0,
                7.0 / 90.0,
            ],
            7,
        ),
        other => {
            return Err(SplitError::Domain(format!(
                "unsupported Newton-Cotes degree {other}, supported: 1..=4"
            )))
        }
    };
    Ok(QuadratureRule {
        degree,
        name,
        weights,
        error_order,
    })
}

/// Nodes and combined weights of the composite rule on `panels` equal panels
/// over `[a, b]`. Shared panel endpoints appear once with merged weight, so
/// the result has `panels * degree + 1` nodes, uniformly spaced.
pub(crate) fn composite_nodes_weights(
    rule: &QuadratureRule,
    a: f64,
    b: f64,
    panels: usize,
) -> (Vec<f64>, Vec<f64>) {
    let d = rule.degree;
    let n_nodes = panels * d + 1;
    let h = (b - a) / (panels * d) as f64;
    let nodes: Vec<f64> = (0..n_nodes)
        .map(|k| {
            if k + 1 == n_nodes {
                b
            } else {
                a + h * k as f64
            }
        })
        .collect();
    let panel_width = (b - a) / panels as f64;
    let mut weights = vec![0.0; n_nodes];
    for p in 0..panels {
        for (r, w) in rule.weights.iter().enumerate() {
            weights[p * d + r] += w * panel_width;
        }
    }
    (nodes, weights)
}

fn check_interval(a: f64, b: f64, panels: usize) -> Result<()> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(SplitError::NonFinite("integration bound".into()));
    }
    if b < a {
        return Err(SplitError::Domain(format!(
            "integration interval reversed: [{a}, {b}]"
        )));
    }
    if panels == 0 {
        return Err(SplitError::Domain("at least one panel required".into()));
    }
    Ok(())
}

/// Composite application of `rule` to `f` on `[a, b]` over `panels` panels.
pub fn integrate<F>(f: F, a: f64, b: f64, rule: &QuadratureRule, panels: usize) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    check_interval(a, b, panels)?;
    let (nodes, weights) = composite_nodes_weights(rule, a, b, panels);
    Ok(nodes.iter().zip(&weights).map(|(&x, &w)| w * f(x)).sum())
}

/// Componentwise analogue of [`integrate`] for vector-valued integrands.
pub fn integrate_vector<F>(
    f: F,
    a: f64,
    b: f64,
    rule: &QuadratureRule,
    panels: usize,
) -> Result<Vector>
where
    F: Fn(f64) -> Vector,
{
    check_interval(a, b, panels)?;
    let (nodes, weights) = composite_nodes_weights(rule, a, b, panels);
    let mut acc = Vector::zeros(f(nodes[0]).len());
    for (&x, &w) in nodes.iter().zip(&weights) {
        acc.axpy(w, &f(x));
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_weights() {
        assert_eq!(rule_coefficients(1).unwrap().weights(), &[0.5, 0.5]);
        assert_eq!(
            rule_coefficients(2).unwrap().weights(),
            &[1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0]
        );
        assert_eq!(
            rule_coefficients(3).unwrap().weights(),
            &[1.0 / 8.0, 3.0 / 8.0, 3.0 / 8.0, 1.0 / 8.0]
        );
        assert_eq!(
            rule_coefficients(4).unwrap().weights(),
            &[
                7.0 / 90.0,
                32.0 / 90.0,
                12.0 / 90.0,
                32.0 / 90.0,
                7.0 / 90.0
            ]
        );
        assert!(rule_coefficients(0).is_err());
        assert!(rule_coefficients(5).is_err());
    }

    #[test]
    fn rule_metadata() {
        for (deg, order) in [(1usize, 3u32), (2, 5), (3, 5), (4, 7)] {
            let rule = rule_coefficients(deg).unwrap();
            assert_eq!(rule.error_order(), order);
            // weights sum to 1 and are symmetric
            let sum: f64 = rule.weights().iter().sum();
            assert!((sum - 1.0).abs() < 1e-15);
            let w = rule.weights();
            for i in 0..w.len() {
                assert_eq!(w[i], w[w.len() - 1 - i]);
            }
        }
    }

    #[test]
    fn simpson_exact_on_cubic() {
        let q = integrate(|x| x * x * x, 0.0, 1.0, &QuadratureRule::simpson(), 1).unwrap();
        assert!((q - 0.25).abs() < 1e-15);
    }

    #[test]
    fn trapezoid_on_square() {
        let q = integrate(|x| x * x, 0.0, 2.0, &QuadratureRule::trapezoid(), 1).unwrap();
        assert!((q - 4.0).abs() < 1e-15);
    }

    #[test]
    fn boole_exact_on_quartic() {
        // oracle: fine Riemann sum for int_0^1 x^4 dx
        let n = 2_000_000;
        let h = 1.0 / n as f64;
        let riemann: f64 = (0..n).map(|i| ((i as f64 + 0.5) * h).powi(4) * h).sum();
        let q = integrate(|x| x.powi(4), 0.0, 1.0, &QuadratureRule::boole(), 1).unwrap();
        assert!((q - riemann).abs() < 1e-9);
        assert!((q - 0.2).abs() < 1e-15);
    }

    #[test]
    fn reversed_interval_rejected() {
        assert!(integrate(|x| x, 1.0, 0.0, &QuadratureRule::simpson(), 1).is_err());
        assert!(integrate(|x| x, 0.0, 1.0, &QuadratureRule::simpson(), 0).is_err());
    }

    #[test]
    fn integrate_vector_examples() {
        let rule = QuadratureRule::simpson();
        let v = integrate_vector(|_| Vector::from(vec![1.0, 2.0]), 0.0, 1.0, &rule, 1).unwrap();
        assert!((v.get(0) - 1.0).abs() < 1e-15);
        assert!((v.get(1) - 2.0).abs() < 1e-15);

        let v = integrate_vector(|t| Vector::from(vec![t, 0.0]), 0.0, 1.0, &rule, 2).unwrap();
        assert!((v.get(0) - 0.5).abs() < 1e-15);
        assert_eq!(v.get(1), 0.0);

        // matches the scalar path on t^3 over [0, 2]
        let v = integrate_vector(|t| Vector::from(vec![t * t * t]), 0.0, 2.0, &rule, 1).unwrap();
        let s = integrate(|t| t * t * t, 0.0, 2.0, &rule, 1).unwrap();
        assert!((v.get(0) - s).abs() < 1e-15);
        assert!((v.get(0) - 4.0).abs() < 1e-13);
    }

    #[test]
    fn composite_refinement_improves() {
        // smooth convex integrand
        let exact = 1f64.exp() - 1.0;
        let rule = QuadratureRule::trapezoid();
        let mut prev = f64::INFINITY;
        for panels in [2usize, 4, 8, 16] {
            let err = (integrate(f64::exp, 0.0, 1.0, &rule, panels).unwrap() - exact).abs();
            assert!(err <= prev);
            prev = err;
        }
    }

    #[test]
    fn composite_observed_orders() {
        let exact = 1f64.exp() - 1.0;
        for (deg, nominal) in [(1usize, 2.0), (2, 4.0), (3, 4.0), (4, 6.0)] {
            let rule = rule_coefficients(deg).unwrap();
            // panel counts chosen so errors stay well above the f64 floor
            let panels: Vec<usize> = match deg {
                1 => vec![8, 16, 32, 64],
                2 | 3 => vec![2, 4, 8, 16],
                _ => vec![1, 2, 4, 8],
            };
            let errs: Vec<f64> = panels
                .iter()
                .map(|&p| (integrate(f64::exp, 0.0, 1.0, &rule, p).unwrap() - exact).abs())
                .collect();
            let mut orders = Vec::new();
            for pair in errs.windows(2) {
                orders.push((pair[0] / pair[1]).log2());
            }
            let mean = orders.iter().sum::<f64>() / orders.len() as f64;
            assert!(
                (mean - nominal).abs() <= 0.2,
                "degree {deg}: observed order {mean}, nominal {nominal}"
            );
        }
    }
}
