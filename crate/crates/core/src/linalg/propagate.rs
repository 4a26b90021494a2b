//! Exponential propagators: homogeneous `exp(tau M) c0` and the
//! variation-of-constants solve for an inhomogeneous linear system.

use super::{expm, DenseMatrix, Vector};
use crate::error::{Result, SplitError};
use crate::quadrature::{composite_nodes_weights, QuadratureRule};

/// `exp(tau M) c0`, the exact solution of `c' = M c` at time `tau`.
pub fn propagate_homogeneous(m: &DenseMatrix, c0: &Vector, tau: f64) -> Result<Vector> {
    if !m.is_square() || m.cols() != c0.len() {
        return Err(SplitError::Dimension(format!(
            "propagator needs square M matching c0, got {}x{} and length {}",
            m.rows(),
            m.cols(),
            c0.len()
        )));
    }
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(SplitError::Domain(format!(
            "propagation time must be finite and nonnegative, got {tau}"
        )));
    }
    Ok(expm(&m.scale(tau))?.matvec(c0))
}

/// Variation-of-constants solve of `c' = M c + g(t)` from `t0` to `t1`:
///
/// `exp((t1-t0) M) c0 + int_{t0}^{t1} exp((t1-s) M) g(s) ds`
///
/// with the integral evaluated by the composite `quad` rule over `panels`
/// panels. The propagated kernel is evaluated exactly (powers of one node-step
/// exponential), so the only discretization error is the quadrature error in
/// `g`. For constant `g`, [`propagate_constant_affine`] gives a
/// quadrature-free result via an augmented-matrix exponential.
pub fn propagate_affine<G>(
    m: &DenseMatrix,
    g: G,
    c0: &Vector,
    t0: f64,
    t1: f64,
    quad: &QuadratureRule,
    panels: usize,
) -> Result<Vector>
where
    G: Fn(f64) -> Vector,
{
    if !m.is_square() || m.cols() != c0.len() {
        return Err(SplitError::Dimension(format!(
            "propagator needs square M matching c0, got {}x{} and length {}",
            m.rows(),
            m.cols(),
            c0.len()
        )));
    }
    if t1 < t0 {
        return Err(SplitError::Domain(format!(
            "propagation interval reversed: [{t0}, {t1}]"
        )));
    }
    if panels == 0 {
        return Err(SplitError::Domain("at least one panel required".into()));
    }
    if t1 == t0 {
        return Ok(c0.clone());
    }

    let (nodes, weights) = composite_nodes_weights(quad, t0, t1, panels);
    let h = nodes[1] - nodes[0];
    let step = expm(&m.scale(h))?;

    // One left-to-right pass: after visiting node k the accumulator holds
    // sum_{j<=k} w_j exp((s_k - s_j) M) g(s_j), and the state holds
    // exp((s_k - t0) M) c0.
    let mut state = c0.clone();
    let mut acc = {
        let g0 = g(nodes[0]);
        if g0.len() != c0.len() {
            return Err(SplitError::Dimension(format!(
                "inhomogeneity length {} does not match state length {}",
                g0.len(),
                c0.len()
            )));
        }
        g0.scale(weights[0])
    };
    for k in 1..nodes.len() {
        state = step.matvec(&state);
        acc = step.matvec(&acc);
        acc.axpy(weights[k], &g(nodes[k]));
    }
    Ok(state.add(&acc))
}

/// Exact solve of `c' = M c + b` with constant `b`, via the exponential of
/// the augmented matrix `[[M, b], [0, 0]]`. No quadrature is involved, which
/// makes this an independent oracle for [`propagate_affine`].
pub fn propagate_constant_affine(
    m: &DenseMatrix,
    b: &Vector,
    c0: &Vector,
    tau: f64,
) -> Result<Vector> {
    if !m.is_square() || m.cols() != c0.len() || b.len() != c0.len() {
        return Err(SplitError::Dimension(
            "augmented propagator needs square M and matching b, c0".into(),
        ));
    }
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(SplitError::Domain(format!(
            "propagation time must be finite and nonnegative, got {tau}"
        )));
    }
    let n = m.rows();
    let mut aug = DenseMatrix::zeros(n + 1, n + 1);
    for i in 0..n {
        for j in 0..n {
            aug.set(i, j, m.get(i, j));
        }
        aug.set(i, n, b.get(i));
    }
    let e = expm(&aug.scale(tau))?;
    let mut out = Vector::zeros(n);
    for i in 0..n {
        let mut v = e.get(i, n);
        for j in 0..n {
            v += e.get(i, j) * c0.get(j);
        }
        out.set(i, v);
    }
    Ok(out)
}
