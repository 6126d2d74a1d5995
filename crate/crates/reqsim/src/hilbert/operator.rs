//! Dense square complex matrix with dimension metadata.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// A dense square complex matrix: Hamiltonians, propagators, projectors.
///
/// Entries are stored row-major; all energies are in units of the nominal
/// Rabi frequency. Values are immutable once built up (the mutating methods
/// are construction helpers), so operators can be shared freely across
/// threads.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    data: Array2<Complex64>,
}

impl Operator {
    /// Wrap an existing matrix; errors if it is not square.
    pub fn from_array(data: Array2<Complex64>) -> Result<Self> {
        if data.nrows() != data.ncols() {
            return Err(Error::NotSquare {
                rows: data.nrows(),
                cols: data.ncols(),
            });
        }
        Ok(Self { data })
    }

    /// Build from rows of a fixed-size array (test/construction helper).
    pub fn from_rows<const N: usize>(rows: &[[Complex64; N]; N]) -> Self {
        let mut data = Array2::zeros((N, N));
        for (i, row) in rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                data[(i, j)] = *v;
            }
        }
        Self { data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            data: Array2::zeros((dim, dim)),
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut op = Self::zeros(dim);
        for i in 0..dim {
            op.data[(i, i)] = Complex64::new(1.0, 0.0);
        }
        op
    }

    pub fn from_diag(diag: &[Complex64]) -> Self {
        let mut op = Self::zeros(diag.len());
        for (i, v) in diag.iter().enumerate() {
            op.data[(i, i)] = *v;
        }
        op
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn entries(&self) -> &Array2<Complex64> {
        &self.data
    }

    #[inline]
    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.data[(row, col)]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.data[(row, col)] = value;
    }

    #[inline]
    pub fn add_to(&mut self, row: usize, col: usize, value: Complex64) {
        self.data[(row, col)] += value;
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let dim = self.dim();
        let mut out = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                out.data[(j, i)] = self.data[(i, j)].conj();
            }
        }
        out
    }

    /// Matrix product `self * rhs`. Panics on dimension mismatch.
    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        Self {
            data: self.data.dot(&rhs.data),
        }
    }

    /// Apply to a state: `self |psi>`.
    pub fn apply(&self, psi: &Array1<Complex64>) -> Array1<Complex64> {
        self.data.dot(psi)
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        Self {
            data: &self.data + &rhs.data,
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        Self {
            data: &self.data - &rhs.data,
        }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            data: self.data.mapv(|v| v * factor),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.data[(i, i)]).sum()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise deviation from `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "operator dimension mismatch");
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Max-abs norm of `A - A^dag`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let dim = self.dim();
        let mut dev: f64 = 0.0;
        for i in 0..dim {
            dev = dev.max(self.data[(i, i)].im.abs());
            for j in (i + 1)..dim {
                dev = dev.max((self.data[(i, j)] - self.data[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// Max-abs norm of `A^dag A - I`.
    pub fn unitarity_deviation(&self) -> f64 {
        let dim = self.dim();
        let mut dev: f64 = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..dim {
                    acc += self.data[(k, i)].conj() * self.data[(k, j)];
                }
                if i == j {
                    acc -= Complex64::new(1.0, 0.0);
                }
                dev = dev.max(acc.norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation() <= tol
    }

    /// `(A + A^dag) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let dim = self.dim();
        let mut out = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                out.data[(i, j)] = 0.5 * (self.data[(i, j)] + self.data[(j, i)].conj());
            }
        }
        out
    }

    /// Restriction to the given (sorted) index set.
    pub fn submatrix(&self, indices: &[usize]) -> Self {
        let k = indices.len();
        let mut out = Self::zeros(k);
        for (r, &i) in indices.iter().enumerate() {
            for (c, &j) in indices.iter().enumerate() {
                out.data[(r, c)] = self.data[(i, j)];
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjoint_and_hermitian_part() {
        let mut a = Operator::zeros(2);
        a.set(0, 1, Complex64::new(1.0, 2.0));
        let ad = a.adjoint();
        assert_eq!(ad.entry(1, 0), Complex64::new(1.0, -2.0));
        let h = a.hermitian_part();
        assert!(h.hermiticity_deviation() == 0.0);
    }

    #[test]
    fn non_square_rejected() {
        let data = Array2::<Complex64>::zeros((2, 3));
        assert!(matches!(
            Operator::from_array(data),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn unitarity_deviation_flags_scaling() {
        let u = Operator::identity(3).scale(Complex64::new(1.1, 0.0));
        assert!(u.unitarity_deviation() > 0.2);
        assert!(Operator::identity(3).unitarity_deviation() == 0.0);
    }
}
