//! Symmetric positive definite solvers used for the reduced susceptance
//! system and least-squares normal equations. Dense Cholesky for small
//! systems, sparse LDL with RCM ordering for large ones.

mod dense;
mod sparse;

pub use dense::DenseCholesky;
pub use sparse::{SparseLdl, SymCsc};

use crate::scalar::Scalar;

/// Bus count above which the susceptance factorization switches to the
/// sparse path.
pub const DENSE_LIMIT: usize = 300;

#[derive(Debug, thiserror::Error)]
pub enum FactorError {
    #[error("matrix is singular or not positive definite at pivot {0}")]
    NotPositiveDefinite(usize),
}

/// A factorized symmetric positive definite system.
pub enum SpdFactor<T: Scalar> {
    Dense(DenseCholesky<T>),
    Sparse(SparseLdl<T>),
}

impl<T: Scalar> SpdFactor<T> {
    /// Factorize a symmetric matrix given as a dense row-major buffer.
    /// Chooses the dense or sparse path by dimension.
    pub fn new_dense_input(n: usize, a: &[T]) -> Result<Self, FactorError> {
        if n <= DENSE_LIMIT {
            Ok(SpdFactor::Dense(DenseCholesky::factor(n, a)?))
        } else {
            let csc = SymCsc::from_dense_upper(n, a);
            Ok(SpdFactor::Sparse(SparseLdl::factor(&csc)?))
        }
    }

    /// Factorize from symmetric triplets (both triangles or upper only).
    pub fn new_triplets(n: usize, triplets: &[(usize, usize, T)]) -> Result<Self, FactorError> {
        if n <= DENSE_LIMIT {
            let mut a = vec![T::zero(); n * n];
            for &(r, c, v) in triplets {
                a[r * n + c] = a[r * n + c] + v;
            }
            Ok(SpdFactor::Dense(DenseCholesky::factor(n, &a)?))
        } else {
            let csc = SymCsc::from_triplets_upper(n, triplets);
            Ok(SpdFactor::Sparse(SparseLdl::factor(&csc)?))
        }
    }

    pub fn solve(&self, rhs: &[T]) -> Vec<T> {
        match self {
            SpdFactor::Dense(f) => f.solve(rhs),
            SpdFactor::Sparse(f) => f.solve(rhs),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            SpdFactor::Dense(f) => f.dim(),
            SpdFactor::Sparse(f) => f.dim(),
        }
    }
}
