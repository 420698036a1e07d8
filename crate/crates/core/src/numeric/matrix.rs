use std::ops::{Index, IndexMut};

use num_complex::Complex;
use num_traits::Zero;

use super::NumericError;
use crate::scalar::Real;

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix<R> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<R>>,
}

impl<R: Real> ComplexMatrix<R> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix { rows, cols, data: vec![Complex::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(R::one(), R::zero());
        }
        m
    }

    pub fn from_diagonal(d: &[R]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, v) in d.iter().enumerate() {
            m[(i, i)] = Complex::new(*v, R::zero());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<R>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[Complex<R>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul(&self, other: &Self) -> Result<Self, NumericError> {
        if self.cols != other.rows {
            return Err(NumericError::Shape { expected: self.cols, found: other.rows });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(i, l)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] = out[(i, j)] + a * other[(l, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Complex<R>]) -> Vec<Complex<R>> {
        debug_assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|i| self.row(i).iter().zip(v).fold(Complex::zero(), |acc, (a, b)| acc + *a * *b)).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> Complex<R> {
        (0..self.rows.min(self.cols)).fold(Complex::zero(), |acc, i| acc + self[(i, i)])
    }

    pub fn max_abs(&self) -> R {
        self.data.iter().fold(R::zero(), |m, z| m.max(z.norm()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> R {
        self.data.iter().zip(&other.data).fold(R::zero(), |m, (a, b)| m.max((*a - *b).norm()))
    }

    /// `max |a_ij − conj(a_ji)|`.
    pub fn hermitian_residual(&self) -> R {
        let mut r = R::zero();
        for i in 0..self.rows {
            for j in i..self.cols {
                r = r.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        r
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn determinant(&self) -> Complex<R> {
        let n = self.rows;
        let mut a = self.clone();
        let mut det = Complex::new(R::one(), R::zero());
        for c in 0..n {
            let p = (c..n).max_by(|&x, &y| a[(x, c)].norm().partial_cmp(&a[(y, c)].norm()).unwrap()).unwrap();
            if a[(p, c)].is_zero() {
                return Complex::zero();
            }
            if p != c {
                for j in 0..n {
                    a.data.swap(p * n + j, c * n + j);
                }
                det = -det;
            }
            let piv = a[(c, c)];
            det = det * piv;
            for r in c + 1..n {
                let f = a[(r, c)] / piv;
                for j in c..n {
                    let v = a[(c, j)];
                    a[(r, j)] = a[(r, j)] - f * v;
                }
            }
        }
        det
    }
}

impl<R> Index<(usize, usize)> for ComplexMatrix<R> {
    type Output = Complex<R>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<R> {
        &self.data[i * self.cols + j]
    }
}

impl<R> IndexMut<(usize, usize)> for ComplexMatrix<R> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<R> {
        &mut self.data[i * self.cols + j]
    }
}

/// Square matrix equal to its conjugate transpose.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix<R>(ComplexMatrix<R>);

impl<R: Real> HermitianMatrix<R> {
    /// Accepts `m` if its Hermitian residual is at most `tol` times its largest
    /// entry (absolute `tol` for a zero matrix), then symmetrizes it exactly.
    pub fn new(m: ComplexMatrix<R>, tol: R) -> Result<Self, NumericError> {
        if !m.is_square() {
            return Err(NumericError::Shape { expected: m.rows(), found: m.cols() });
        }
        let scale = m.max_abs().max(R::one());
        let res = m.hermitian_residual();
        if res > tol * scale {
            return Err(NumericError::NotHermitian { residual: res.to_f64().unwrap_or(f64::NAN) });
        }
        Ok(Self::symmetrize(m))
    }

    pub(crate) fn symmetrize(m: ComplexMatrix<R>) -> Self {
        let half = R::of(0.5);
        let n = m.rows();
        let out = ComplexMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex::new(m[(i, i)].re, R::zero())
            } else {
                (m[(i, j)] + m[(j, i)].conj()).scale(half)
            }
        });
        HermitianMatrix(out)
    }

    pub fn identity(n: usize) -> Self {
        HermitianMatrix(ComplexMatrix::identity(n))
    }

    pub fn from_real_diagonal(d: &[R]) -> Self {
        HermitianMatrix(ComplexMatrix::from_diagonal(d))
    }

    pub fn size(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix<R> {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix<R> {
        self.0
    }

    pub fn diagonal(&self) -> Vec<R> {
        (0..self.size()).map(|i| self.0[(i, i)].re).collect()
    }

    /// Lower-triangular `L` with positive real diagonal and `L·L* = self`.
    ///
    /// Fails when a squared pivot falls below `floor` times its diagonal entry.
    pub fn cholesky(&self, floor: R) -> Result<ComplexMatrix<R>, NumericError> {
        let n = self.size();
        let a = &self.0;
        let mut l = ComplexMatrix::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)].re;
            for p in 0..j {
                d = d - l[(j, p)].norm_sqr();
            }
            if !(d > floor * a[(j, j)].re.abs()) || !(d > R::zero()) {
                return Err(NumericError::NotPositiveDefinite { index: j, pivot: d.to_f64().unwrap_or(f64::NAN) });
            }
            let ljj = d.sqrt();
            l[(j, j)] = Complex::new(ljj, R::zero());
            for i in j + 1..n {
                let mut s = a[(i, j)];
                for p in 0..j {
                    s = s - l[(i, p)] * l[(j, p)].conj();
                }
                l[(i, j)] = s.unscale(ljj);
            }
        }
        Ok(l)
    }
}

/// Inverse of a lower-triangular matrix with nonzero diagonal.
pub(crate) fn lower_triangular_inverse<R: Real>(l: &ComplexMatrix<R>) -> ComplexMatrix<R> {
    let n = l.rows();
    let mut inv = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        inv[(j, j)] = Complex::new(R::one(), R::zero()) / l[(j, j)];
        for i in j + 1..n {
            let mut s: Complex<R> = Complex::zero();
            for p in j..i {
                s = s + l[(i, p)] * inv[(p, j)];
            }
            inv[(i, j)] = -s / l[(i, i)];
        }
    }
    inv
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn cholesky_and_inverse() {
        let g = ComplexMatrix::from_fn(3, 3, |i, j| match (i, j) {
            (0, 0) => c(4.0, 0.0),
            (1, 1) => c(3.0, 0.0),
            (2, 2) => c(2.0, 0.0),
            (0, 1) => c(1.0, 1.0),
            (1, 0) => c(1.0, -1.0),
            (1, 2) => c(0.0, 0.5),
            (2, 1) => c(0.0, -0.5),
            _ => c(0.0, 0.0),
        });
        let h = HermitianMatrix::new(g.clone(), 1e-12).unwrap();
        let l = h.cholesky(1e-10).unwrap();
        assert!(l.mul(&l.adjoint()).unwrap().max_abs_diff(&g) < 1e-12);
        let li = lower_triangular_inverse(&l);
        assert!(li.mul(&l).unwrap().max_abs_diff(&ComplexMatrix::identity(3)) < 1e-12);
        assert!((g.determinant() - c(4.0 * 3.0 * 2.0 - 4.0 * 0.25 - 2.0 * 2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        let m = ComplexMatrix::from_fn(2, 2, |i, j| if i < j { c(1.0, 0.0) } else { c(0.0, 0.0) });
        assert!(HermitianMatrix::new(m, 1e-12).is_err());
        let singular = HermitianMatrix::new(ComplexMatrix::from_fn(2, 2, |_, _| c(1.0, 0.0)), 1e-12).unwrap();
        assert!(matches!(singular.cholesky(1e-10), Err(NumericError::NotPositiveDefinite { index: 1, .. })));
    }
}
