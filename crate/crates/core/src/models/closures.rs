//! Closed forms for the Newton-Cotes closures of `u' = int_0^t u(s) ds`.
//!
//! Closing the memory integral with the trapezoid rule gives the linear ODE
//! `u' = (t/2)(u0 + u)`, solvable by an integrating factor. Closing it with
//! Simpson's rule gives the pantograph-type equation
//! `u' = (t/6)(u0 + 4 u(t/2) + u(t))`, solved by a power series whose
//! coefficients follow from matching powers of `t`.

use crate::error::{Result, SplitError};

/// Exact solution `(2 exp(t^2/4) - 1) u0` of the trapezoid closure
/// `u' = (t/2)(u0 + u)`, `u(0) = u0`.
pub fn trapezoid_closure_exact(t: f64, u0: f64) -> f64 {
    (2.0 * (0.25 * t * t).exp() - 1.0) * u0
}

/// Exact rational arithmetic for the series coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rational {
    num: i128,
    den: i128,
}

impl Rational {
    pub fn new(num: i128, den: i128) -> Self {
        assert!(den != 0, "zero denominator");
        let mut r = Self { num, den };
        r.reduce();
        r
    }

    pub fn zero() -> Self {
        Self { num: 0, den: 1 }
    }

    pub fn num(&self) -> i128 {
        self.num
    }

    pub fn den(&self) -> i128 {
        self.den
    }

    fn reduce(&mut self) {
        if self.den < 0 {
            self.num = -self.num;
            self.den = -self.den;
        }
        let g = gcd(self.num.unsigned_abs(), self.den.unsigned_abs());
        if g > 1 {
            self.num /= g as i128;
            self.den /= g as i128;
        }
    }

    pub fn add(&self, other: &Rational) -> Rational {
        Rational::new(
            self.num * other.den + other.num * self.den,
            self.den * other.den,
        )
    }

    pub fn mul(&self, other: &Rational) -> Rational {
        Rational::new(self.num * other.num, self.den * other.den)
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

/// Power-series coefficients `a_0 ..= a_n` of the Simpson closure solution,
/// normalized to `a_0 = 1` (multiply by `u0` for a general initial value),
/// as exact rationals.
///
/// Matching powers of `t` in `u' = (t/6)(u0 + 4 u(t/2) + u(t))` gives
/// `a_1 = 0`, `a_2 = a_0 / 2`, and for `m >= 2`
/// `a_{m+1} = a_{m-1} (2^{3-m} + 1) / (6 (m + 1))`; all odd coefficients
/// vanish. (The ratio `a_4 / a_2 = 1/12` falls out of the recurrence.)
pub fn simpson_closure_series_exact(n_terms: usize) -> Vec<Rational> {
    // i128 denominators overflow beyond this; far more terms than any
    // truncation needs
    assert!(n_terms <= 64, "series truncation limited to 64 terms");
    let mut a = vec![Rational::zero(); n_terms + 1];
    a[0] = Rational::new(1, 1);
    if n_terms >= 2 {
        a[2] = Rational::new(1, 2);
    }
    for m in 2..n_terms {
        // coefficient of t^{m+1} from the one of t^{m-1}
        let four_over_pow = Rational::new(4, 1i128 << (m - 1));
        let factor = four_over_pow
            .add(&Rational::new(1, 1))
            .mul(&Rational::new(1, 6 * (m as i128 + 1)));
        a[m + 1] = a[m - 1].mul(&factor);
    }
    a
}

/// Power-series coefficients `a_0 ..= a_n` of the Simpson closure solution
/// with `a_0 = u0`, as floating-point numbers.
pub fn simpson_closure_series(u0: f64, n_terms: usize) -> Result<Vec<f64>> {
    if !u0.is_finite() {
        return Err(SplitError::NonFinite("initial value".into()));
    }
    Ok(simpson_closure_series_exact(n_terms)
        .iter()
        .map(|r| r.to_f64() * u0)
        .collect())
}
