use super::FactorError;
use crate::scalar::Scalar;

/// Dense Cholesky (L L^T) factorization of a symmetric positive definite
/// matrix stored row-major.
pub struct DenseCholesky<T: Scalar> {
    n: usize,
    // lower triangle of L, row-major full storage
    l: Vec<T>,
}

impl<T: Scalar> DenseCholesky<T> {
    pub fn factor(n: usize, a: &[T]) -> Result<Self, FactorError> {
        assert_eq!(a.len(), n * n, "matrix buffer size mismatch");
        let mut max_diag = T::zero();
        for i in 0..n {
            if a[i * n + i].abs() > max_diag {
                max_diag = a[i * n + i].abs();
            }
        }
        let tiny = max_diag * T::c(1e-12);
        let mut l = vec![T::zero(); n * n];
        for j in 0..n {
            let mut diag = a[j * n + j];
            for k in 0..j {
                let ljk = l[j * n + k];
                diag = diag - ljk * ljk;
            }
            if diag <= tiny || !diag.is_finite() {
                return Err(FactorError::NotPositiveDefinite(j));
            }
            let dsqrt = diag.sqrt();
            l[j * n + j] = dsqrt;
            for i in (j + 1)..n {
                let mut s = a[i * n + j];
                for k in 0..j {
                    s = s - l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / dsqrt;
            }
        }
        Ok(Self { n, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, rhs: &[T]) -> Vec<T> {
        assert_eq!(rhs.len(), self.n, "rhs dimension mismatch");
        let n = self.n;
        let mut y = rhs.to_vec();
        // forward: L y = rhs
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s = s - self.l[i * n + k] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        // backward: L^T x = y
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s = s - self.l[k * n + i] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        y
    }
}
