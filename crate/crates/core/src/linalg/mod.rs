//! Dense matrix/vector arithmetic, matrix exponentials and exponential
//! propagators for semi-discretized operators.
//!
//! Everything is real double precision, row-major and allocation-per-result.
//! Problem sizes here are modest (up to ~10^3), so no sparse storage and no
//! external BLAS.

mod expm;
mod propagate;

pub use expm::expm;
pub use propagate::{propagate_affine, propagate_constant_affine, propagate_homogeneous};

use crate::error::{Result, SplitError};

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Build a matrix from row-major entries. All entries must be finite.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(SplitError::Dimension(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(SplitError::Dimension(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        if !data.iter().all(|x| x.is_finite()) {
            return Err(SplitError::NonFinite("matrix entry".into()));
        }
        Ok(Self { rows, cols, data })
    }

    /// Build from nested rows; rows must have equal lengths.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(SplitError::Dimension("ragged rows".into()));
        }
        Self::new(r, c, rows.concat())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Diagonal matrix from the given entries.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = d;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[f64] {
        &self.data
    }

    /// True when every off-diagonal entry is exactly zero.
    pub fn is_diagonal(&self) -> bool {
        self.is_square()
            && (0..self.rows)
                .all(|i| (0..self.cols).all(|j| i == j || self.data[i * self.cols + j] == 0.0))
    }

    pub fn diagonal(&self) -> Vector {
        let n = self.rows.min(self.cols);
        Vector::from((0..n).map(|i| self.get(i, i)).collect::<Vec<_>>())
    }

    pub fn add(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn scale(&self, k: f64) -> DenseMatrix {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * k).collect(),
        }
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let (n, k, m) = (self.rows, self.cols, other.cols);
        let mut out = DenseMatrix::zeros(n, m);
        for i in 0..n {
            for p in 0..k {
                let a = self.data[i * k + p];
                if a == 0.0 {
                    continue;
                }
                let row = &other.data[p * m..(p + 1) * m];
                let dst = &mut out.data[i * m..(i + 1) * m];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &Vector) -> Vector {
        assert_eq!(self.cols, v.len(), "matvec dimension mismatch");
        let mut out = vec![0.0; self.rows];
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            *o = row.iter().zip(v.entries()).map(|(a, x)| a * x).sum();
        }
        Vector::from(out)
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .map(|x| x.abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, x| acc.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

/// Dense vector of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    data: Vec<f64>,
}

impl Vector {
    /// Build a vector, checking all entries are finite.
    pub fn new(data: Vec<f64>) -> Result<Self> {
        if data.is_empty() {
            return Err(SplitError::Dimension("empty vector".into()));
        }
        if !data.iter().all(|x| x.is_finite()) {
            return Err(SplitError::NonFinite("vector entry".into()));
        }
        Ok(Self { data })
    }

    pub fn zeros(n: usize) -> Self {
        Self { data: vec![0.0; n] }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> f64 {
        self.data[i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: f64) {
        self.data[i] = v;
    }

    pub fn entries(&self) -> &[f64] {
        &self.data
    }

    pub fn add(&self, other: &Vector) -> Vector {
        assert_eq!(self.len(), other.len());
        Vector::from(
            self.data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect::<Vec<_>>(),
        )
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        assert_eq!(self.len(), other.len());
        Vector::from(
            self.data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect::<Vec<_>>(),
        )
    }

    pub fn scale(&self, k: f64) -> Vector {
        Vector::from(self.data.iter().map(|a| a * k).collect::<Vec<_>>())
    }

    /// `self += k * other` in place.
    pub fn axpy(&mut self, k: f64, other: &Vector) {
        assert_eq!(self.len(), other.len());
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += k * b;
        }
    }

    /// Entrywise product.
    pub fn hadamard(&self, other: &Vector) -> Vector {
        assert_eq!(self.len(), other.len());
        Vector::from(
            self.data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a * b)
                .collect::<Vec<_>>(),
        )
    }

    pub fn norm_inf(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, x| acc.max(x.abs()))
    }

    pub fn norm_l2(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

impl From<Vec<f64>> for Vector {
    fn from(data: Vec<f64>) -> Self {
        Self { data }
    }
}

/// Uniform time grid on `[t0, t_end]` with `n_steps` steps.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    t0: f64,
    t_end: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, t_end: f64, n_steps: usize) -> Result<Self> {
        if !(t0.is_finite() && t_end.is_finite()) {
            return Err(SplitError::NonFinite("time grid bound".into()));
        }
        if t_end <= t0 {
            return Err(SplitError::Domain(format!(
                "time grid needs t_end > t0, got [{t0}, {t_end}]"
            )));
        }
        if n_steps == 0 {
            return Err(SplitError::Domain(
                "time grid needs at least one step".into(),
            ));
        }
        Ok(Self { t0, t_end, n_steps })
    }

    #[inline]
    pub fn t0(&self) -> f64 {
        self.t0
    }

    #[inline]
    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    #[inline]
    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Step size `(t_end - t0) / n_steps`.
    #[inline]
    pub fn dt(&self) -> f64 {
        (self.t_end - self.t0) / self.n_steps as f64
    }

    /// Time at step boundary `n` (0 ..= n_steps).
    #[inline]
    pub fn time(&self, n: usize) -> f64 {
        if n == self.n_steps {
            self.t_end
        } else {
            self.t0 + self.dt() * n as f64
        }
    }
}

/// Commutator `[A, B] = AB - BA`, the object controlling the leading
/// splitting error.
pub fn commutator(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if !a.is_square() || !b.is_square() || a.rows() != b.rows() {
        return Err(SplitError::Dimension(format!(
            "commutator needs square matrices of equal size, got {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    Ok(a.matmul(b).sub(&b.matmul(a)))
}

/// Logarithmic norm in the infinity norm:
/// `mu_inf(M) = max_i ( M_ii + sum_{j != i} |M_ij| )`.
///
/// This is the one-sided derivative of `||exp(tM)||_inf` at `t = 0` and
/// certifies the semigroup growth bound `||exp(tM)|| <= exp(t mu)`.
pub fn log_norm_inf(m: &DenseMatrix) -> Result<f64> {
    if !m.is_square() {
        return Err(SplitError::Dimension(format!(
            "logarithmic norm needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    let mut mu = f64::NEG_INFINITY;
    for i in 0..n {
        let mut row = m.get(i, i);
        for j in 0..n {
            if j != i {
                row += m.get(i, j).abs();
            }
        }
        mu = mu.max(row);
    }
    Ok(mu)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructor_rejects_bad_input() {
        assert!(DenseMatrix::new(2, 2, vec![1.0; 3]).is_err());
        assert!(DenseMatrix::new(2, 2, vec![1.0, f64::NAN, 0.0, 0.0]).is_err());
        assert!(Vector::new(vec![f64::INFINITY]).is_err());
        assert!(TimeGrid::new(1.0, 0.0, 10).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 0).is_err());
    }

    #[test]
    fn matmul_and_matvec() {
        let a = DenseMatrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        let b = DenseMatrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let ab = a.matmul(&b);
        assert_eq!(
            ab,
            DenseMatrix::from_rows(&[&[2.0, 1.0], &[4.0, 3.0]]).unwrap()
        );
        let v = a.matvec(&Vector::from(vec![1.0, 1.0]));
        assert_eq!(v.entries(), &[3.0, 7.0]);
    }

    #[test]
    fn commutator_examples() {
        let a = DenseMatrix::from_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        let b = DenseMatrix::from_rows(&[&[0.0, 0.0], &[1.0, 0.0]]).unwrap();
        let c = commutator(&a, &b).unwrap();
        assert_eq!(
            c,
            DenseMatrix::from_rows(&[&[1.0, 0.0], &[0.0, -1.0]]).unwrap()
        );

        // equal operands commute
        let z = commutator(&a, &a).unwrap();
        assert_eq!(z.max_abs(), 0.0);

        // diagonals commute
        let d1 = DenseMatrix::from_diagonal(&[1.0, 2.0]);
        let d2 = DenseMatrix::from_diagonal(&[-3.0, 5.0]);
        assert_eq!(commutator(&d1, &d2).unwrap().max_abs(), 0.0);

        // antisymmetry is exact
        let back = commutator(&b, &a).unwrap();
        assert_eq!(c.scale(-1.0), back);
    }

    #[test]
    fn commutator_dimension_error() {
        let a = DenseMatrix::identity(2);
        let b = DenseMatrix::identity(3);
        assert!(commutator(&a, &b).is_err());
        let rect = DenseMatrix::zeros(2, 3);
        assert!(commutator(&rect, &rect).is_err());
    }

    #[test]
    fn log_norm_examples() {
        let d = DenseMatrix::from_diagonal(&[-1.0, -2.0]);
        assert_eq!(log_norm_inf(&d).unwrap(), -1.0);

        let m = DenseMatrix::from_rows(&[&[-2.0, 1.0], &[1.0, -2.0]]).unwrap();
        assert_eq!(log_norm_inf(&m).unwrap(), -1.0);

        assert_eq!(log_norm_inf(&DenseMatrix::zeros(3, 3)).unwrap(), 0.0);
        assert!(log_norm_inf(&DenseMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn time_grid_basics() {
        let g = TimeGrid::new(0.0, 1.0, 4).unwrap();
        assert_eq!(g.dt(), 0.25);
        assert_eq!(g.time(0), 0.0);
        assert_eq!(g.time(4), 1.0);
        assert!((g.time(3) - 0.75).abs() < 1e-15);
    }
}
