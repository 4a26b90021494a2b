//! Matrix exponential by scaling and squaring with a diagonal Pade
//! approximant of order 6.
//!
//! The input is scaled by a power of two until its infinity norm is at most
//! 0.5, the [6/6] Pade approximant is evaluated there, and the result is
//! squared back up. At norm 0.5 the approximant's relative backward error is
//! ~4e-17, so the overall relative error stays well below 1e-12 for norms up
//! to ~1e3 (11 squarings).

use super::DenseMatrix;
use crate::error::{Result, SplitError};

/// Coefficients of the [6/6] Pade numerator of exp;
/// the denominator uses the same coefficients with alternating signs.
const PADE6: [f64; 7] = [
    1.0,
    1.0 / 2.0,
    5.0 / 44.0,
    1.0 / 66.0,
    1.0 / 792.0,
    1.0 / 15_840.0,
    1.0 / 665_280.0,
];

/// Largest scaled norm accepted before squaring.
const THETA: f64 = 0.5;

/// Matrix exponential `exp(M)`.
pub fn expm(m: &DenseMatrix) -> Result<DenseMatrix> {
    if !m.is_square() {
        return Err(SplitError::Dimension(format!(
            "expm needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if !m.is_finite() {
        return Err(SplitError::NonFinite("expm input".into()));
    }
    let n = m.rows();
    let norm = m.norm_inf();
    let squarings = if norm <= THETA {
        0
    } else {
        (norm / THETA).log2().ceil() as u32
    };
    let a = m.scale(0.5f64.powi(squarings as i32));

    let a2 = a.matmul(&a);
    let a4 = a2.matmul(&a2);

    // Split the Pade polynomial into even part V and odd part U = A * (...):
    // numerator = V + U, denominator = V - U.
    let ident = DenseMatrix::identity(n);
    let mut u_inner = ident.scale(PADE6[1]);
    u_inner = u_inner.add(&a2.scale(PADE6[3]));
    u_inner = u_inner.add(&a4.scale(PADE6[5]));
    let u = a.matmul(&u_inner);

    let a6 = a4.matmul(&a2);
    let mut v = ident.scale(PADE6[0]);
    v = v.add(&a2.scale(PADE6[2]));
    v = v.add(&a4.scale(PADE6[4]));
    v = v.add(&a6.scale(PADE6[6]));

    let numer = v.add(&u);
    let denom = v.sub(&u);
    let mut result = solve_matrix(denom, numer)?;

    for _ in 0..squarings {
        result = result.matmul(&result);
    }
    if !result.is_finite() {
        return Err(SplitError::Divergence("matrix exponential".into()));
    }
    Ok(result)
}

/// Solve `A X = B` for the square matrix `X` by LU with partial pivoting.
fn solve_matrix(a: DenseMatrix, b: DenseMatrix) -> Result<DenseMatrix> {
    let n = a.rows();
    debug_assert!(a.is_square() && b.rows() == n);
    let mut lu: Vec<f64> = a.entries().to_vec();
    let mut x: Vec<f64> = b.entries().to_vec();
    let m = b.cols();

    for k in 0..n {
        // partial pivot
        let mut piv = k;
        let mut max = lu[k * n + k].abs();
        for i in (k + 1)..n {
            let v = lu[i * n + k].abs();
            if v > max {
                max = v;
                piv = i;
            }
        }
        if max == 0.0 {
            return Err(SplitError::Singular);
        }
        if piv != k {
            for j in 0..n {
                lu.swap(k * n + j, piv * n + j);
            }
            for j in 0..m {
                x.swap(k * m + j, piv * m + j);
            }
        }
        let inv_pivot = 1.0 / lu[k * n + k];
        for i in (k + 1)..n {
            let factor = lu[i * n + k] * inv_pivot;
            if factor == 0.0 {
                continue;
            }
            lu[i * n + k] = factor;
            for j in (k + 1)..n {
                lu[i * n + j] -= factor * lu[k * n + j];
            }
            for j in 0..m {
                x[i * m + j] -= factor * x[k * m + j];
            }
        }
    }

    // back substitution
    for k in (0..n).rev() {
        let inv_pivot = 1.0 / lu[k * n + k];
        for j in 0..m {
            x[k * m + j] *= inv_pivot;
        }
        for i in 0..k {
            let factor = lu[i * n + k];
            if factor == 0.0 {
                continue;
            }
            for j in 0..m {
                x[i * m + j] -= factor * x[k * m + j];
            }
        }
    }

    DenseMatrix::new(n, m, x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_diff(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
        a.sub(b).max_abs()
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let e = expm(&DenseMatrix::zeros(2, 2)).unwrap();
        assert_eq!(max_diff(&e, &DenseMatrix::identity(2)), 0.0);
    }

    #[test]
    fn exp_of_diagonal() {
        let e = expm(&DenseMatrix::from_diagonal(&[1.0, 2.0])).unwrap();
        let want = DenseMatrix::from_diagonal(&[1f64.exp(), 2f64.exp()]);
        assert!(max_diff(&e, &want) < 1e-13 * 2f64.exp());
    }

    #[test]
    fn exp_of_nilpotent_truncates_exactly() {
        let m = DenseMatrix::from_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        let e = expm(&m).unwrap();
        let want = DenseMatrix::from_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap();
        assert!(max_diff(&e, &want) < 1e-15);
    }

    #[test]
    fn exp_rejects_non_square() {
        assert!(expm(&DenseMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn exp_large_norm_diagonal() {
        // norm 1e3 exercises the squaring path
        let e = expm(&DenseMatrix::from_diagonal(&[-1000.0, 3.0])).unwrap();
        let rel = (e.get(1, 1) - 3f64.exp()).abs() / 3f64.exp();
        assert!(rel < 1e-12, "rel err {rel}");
        assert!(e.get(0, 0).abs() < 1e-300);
    }

    #[test]
    fn exp_inverse_identity() {
        // exp(M) exp(-M) = I, a quick sanity case; the property test over
        // random matrices lives with the crate invariants.
        let m = DenseMatrix::from_rows(&[&[0.3, -1.2, 0.1], &[0.5, 0.2, -0.4], &[-0.2, 0.8, -0.6]])
            .unwrap();
        let e = expm(&m).unwrap();
        let einv = expm(&m.scale(-1.0)).unwrap();
        let prod = e.matmul(&einv);
        assert!(max_diff(&prod, &DenseMatrix::identity(3)) < 1e-12);
    }
}
