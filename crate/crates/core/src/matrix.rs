//! Dense complex matrices with the handful of linear-algebra operations the
//! rest of the crate needs: Hermitian eigendecomposition, principal square
//! root, Kronecker products, and defect measurements for validators.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Square complex matrix. Thin wrapper over a dense nalgebra matrix; the
/// wrapper guarantees squareness and finiteness at construction so downstream
/// code never re-checks either.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    /// Builds a matrix from row-major data. Errors unless the shape is square
    /// and every entry is finite.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
            return Err(Error::NotSquare { rows: n, cols });
        }
        let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        Self::from_inner(m)
    }

    /// Wraps an already-shaped nalgebra matrix, applying the same checks as
    /// [`ComplexMatrix::from_rows`].
    pub fn from_inner(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self(m))
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> Complex64) -> Result<Self> {
        Self::from_inner(DMatrix::from_fn(dim, dim, f))
    }

    /// Diagonal matrix with the given real entries.
    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        Self::from_fn(diag.len(), |i, j| {
            if i == j {
                Complex64::new(diag[i], 0.0)
            } else {
                Complex64::ZERO
            }
        })
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    /// Pauli matrix by index: 0 is the identity, 1..=3 are x, y, z.
    pub fn pauli(index: usize) -> Result<Self> {
        let z = Complex64::ZERO;
        let one = Complex64::ONE;
        let i = Complex64::I;
        let rows = match index {
            0 => [[one, z], [z, one]],
            1 => [[z, one], [one, z]],
            2 => [[z, -i], [i, z]],
            3 => [[one, z], [z, -one]],
            _ => return Err(Error::InvalidPauliIndex { index }),
        };
        Self::from_fn(2, |r, c| rows[r][c])
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub fn inner(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn trace(&self) -> Complex64 {
        self.0.diagonal().iter().sum()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self(&self.0 * Complex64::new(factor, 0.0))
    }

    pub fn scale_complex(&self, factor: Complex64) -> Self {
        Self(&self.0 * factor)
    }

    pub fn kronecker(&self, other: &Self) -> Self {
        Self(self.0.kronecker(&other.0))
    }

    /// tr(self * other) without forming the product.
    pub fn trace_product(&self, other: &Self) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        let n = self.dim();
        let mut acc = Complex64::ZERO;
        for i in 0..n {
            for j in 0..n {
                acc += self.0[(i, j)] * other.0[(j, i)];
            }
        }
        Ok(acc)
    }

    /// Largest entry magnitude of self - self†. Zero for exactly Hermitian
    /// matrices; validators compare this against a tolerance.
    pub fn hermiticity_defect(&self) -> f64 {
        let adj = self.0.adjoint();
        (&self.0 - adj).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entry magnitude of the difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "max_abs_diff dimension mismatch");
        (&self.0 - &other.0).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Eigenvalues of a Hermitian matrix, ascending. The caller is
    /// responsible for Hermiticity; the symmetric solver silently uses only
    /// one triangle otherwise.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let eigen = self.0.clone().symmetric_eigen();
        let mut values: Vec<f64> = eigen.eigenvalues.iter().copied().collect();
        values.sort_by(|a, b| a.total_cmp(b));
        values
    }

    /// Principal square root of a Hermitian PSD matrix. Eigenvalues in
    /// (-tol, 0) from rounding are clamped to zero before the square root.
    pub fn hermitian_sqrt(&self) -> Self {
        let eigen = self.0.clone().symmetric_eigen();
        let roots: Vec<f64> = eigen
            .eigenvalues
            .iter()
            .map(|&v| if v > 0.0 { v.sqrt() } else { 0.0 })
            .collect();
        let v = &eigen.eigenvectors;
        let n = self.dim();
        let mut scaled = v.clone();
        for (k, root) in roots.iter().enumerate() {
            for r in 0..n {
                scaled[(r, k)] *= Complex64::new(*root, 0.0);
            }
        }
        Self(&scaled * v.adjoint())
    }
}

macro_rules! delegate_binop {
    ($trait:ident, $method:ident) => {
        impl std::ops::$trait for &ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: &ComplexMatrix) -> ComplexMatrix {
                ComplexMatrix(std::ops::$trait::$method(&self.0, &rhs.0))
            }
        }
        impl std::ops::$trait<&ComplexMatrix> for ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: &ComplexMatrix) -> ComplexMatrix {
                std::ops::$trait::$method(&self, rhs)
            }
        }
        impl std::ops::$trait<ComplexMatrix> for &ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: ComplexMatrix) -> ComplexMatrix {
                std::ops::$trait::$method(self, &rhs)
            }
        }
        impl std::ops::$trait for ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: ComplexMatrix) -> ComplexMatrix {
                std::ops::$trait::$method(&self, &rhs)
            }
        }
    };
}

delegate_binop!(Add, add);
delegate_binop!(Sub, sub);
delegate_binop!(Mul, mul);

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn pauli_algebra_holds() {
        let x = ComplexMatrix::pauli(1).unwrap();
        let y = ComplexMatrix::pauli(2).unwrap();
        let z = ComplexMatrix::pauli(3).unwrap();
        let id = ComplexMatrix::identity(2);

        assert!((&x * &x).max_abs_diff(&id) < 1e-15);
        assert!((&y * &y).max_abs_diff(&id) < 1e-15);
        let xy = &x * &y;
        let iz = z.scale_complex(Complex64::I);
        assert!(xy.max_abs_diff(&iz) < 1e-15);
        assert!(ComplexMatrix::pauli(4).is_err());
    }

    #[test]
    fn rejects_non_square_and_non_finite() {
        let bad = ComplexMatrix::from_rows(&[vec![re(1.0)], vec![re(2.0)]]);
        assert!(matches!(bad, Err(Error::NotSquare { .. })));

        let nan = ComplexMatrix::from_rows(&[
            vec![re(f64::NAN), re(0.0)],
            vec![re(0.0), re(1.0)],
        ]);
        assert!(matches!(nan, Err(Error::NonFinite)));
    }

    #[test]
    fn eigenvalues_of_sigma_z_are_plus_minus_one() {
        let z = ComplexMatrix::pauli(3).unwrap();
        let vals = z.hermitian_eigenvalues();
        assert_abs_diff_eq!(vals[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(vals[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn sqrt_of_diagonal_matrix() {
        let m = ComplexMatrix::from_real_diagonal(&[4.0, 9.0]).unwrap();
        let root = m.hermitian_sqrt();
        let expected = ComplexMatrix::from_real_diagonal(&[2.0, 3.0]).unwrap();
        assert!(root.max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn sqrt_recovers_matrix_after_squaring() {
        // Hermitian PSD matrix with off-diagonal structure.
        let m = ComplexMatrix::from_rows(&[
            vec![re(2.0), Complex64::new(0.5, 0.25)],
            vec![Complex64::new(0.5, -0.25), re(1.0)],
        ])
        .unwrap();
        let root = m.hermitian_sqrt();
        assert!((&root * &root).max_abs_diff(&m) < 1e-12);
    }

    #[test]
    fn trace_product_matches_full_product() {
        let x = ComplexMatrix::pauli(1).unwrap();
        let h = ComplexMatrix::from_rows(&[
            vec![re(0.7), Complex64::new(0.1, 0.2)],
            vec![Complex64::new(0.1, -0.2), re(0.3)],
        ])
        .unwrap();
        let direct = (&x * &h).trace();
        let fast = x.trace_product(&h).unwrap();
        assert_abs_diff_eq!(direct.re, fast.re, epsilon = 1e-14);
        assert_abs_diff_eq!(direct.im, fast.im, epsilon = 1e-14);
    }

    #[test]
    fn kronecker_grows_dimension() {
        let x = ComplexMatrix::pauli(1).unwrap();
        let z = ComplexMatrix::pauli(3).unwrap();
        let xz = x.kronecker(&z);
        assert_eq!(xz.dim(), 4);
        // (sigma_x (x) sigma_z)[0][2] = x[0][1] * z[0][0] = 1.
        assert_abs_diff_eq!(xz.entry(0, 2).re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(xz.entry(2, 0).re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn hermiticity_defect_detects_asymmetry() {
        let m = ComplexMatrix::from_rows(&[
            vec![re(1.0), re(0.5)],
            vec![re(0.0), re(1.0)],
        ])
        .unwrap();
        assert_abs_diff_eq!(m.hermiticity_defect(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(ComplexMatrix::pauli(2).unwrap().hermiticity_defect(), 0.0);
    }
}
