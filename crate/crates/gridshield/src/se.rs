//! DC state estimation, the residual bad-data check, and construction of
//! residual-invariant attack vectors (a = H c).

use crate::dc::SusceptanceSystem;
use crate::grid::GridCase;
use crate::linalg::DenseCholesky;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasurementKind {
    /// Net injection at a bus (internal index).
    Injection(usize),
    /// Flow on a branch (internal index), from -> to positive.
    Flow(usize),
}

#[derive(Debug, thiserror::Error)]
pub enum SeError {
    #[error("measurement vector has {got} entries, model has {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("state vector has {got} entries, model has {expected} buses")]
    StateDimension { expected: usize, got: usize },
    #[error("model is rank deficient (unobservable)")]
    RankDeficient,
    #[error("state error vector must be zero at the reference bus")]
    NonzeroReference,
}

/// Linear measurement model Z = H x + e with one injection row per bus and
/// one flow row per branch.
pub struct MeasurementModel<T: Scalar> {
    /// n_m x n_b row-major Jacobian.
    pub h: Vec<T>,
    pub kinds: Vec<MeasurementKind>,
    pub n_buses: usize,
    pub reference: usize,
}

#[derive(Debug, Clone)]
pub struct StateEstimate<T: Scalar> {
    /// Estimated angles, reference fixed at exactly 0.
    pub angles: Vec<T>,
    /// 2-norm of the measurement residual.
    pub residual_norm: T,
}

impl<T: Scalar> MeasurementModel<T> {
    /// Assemble H from the susceptance system: injection rows are the B
    /// matrix rows, flow rows couple the branch endpoints.
    pub fn build(case: &GridCase<T>, sys: &SusceptanceSystem<T>) -> Self {
        let n = case.n_buses();
        let n_m = n + case.n_branches();
        let mut h = vec![T::zero(); n_m * n];
        let mut kinds = Vec::with_capacity(n_m);
        let b = sys.b_dense();
        for i in 0..n {
            h[i * n..(i + 1) * n].copy_from_slice(&b[i * n..(i + 1) * n]);
            kinds.push(MeasurementKind::Injection(i));
        }
        for (k, &(f, t, bk)) in sys.branch_susceptances().iter().enumerate() {
            let row = n + k;
            h[row * n + f] = bk;
            h[row * n + t] = -bk;
            kinds.push(MeasurementKind::Flow(k));
        }
        Self {
            h,
            kinds,
            n_buses: n,
            reference: case.reference(),
        }
    }

    pub fn n_measurements(&self) -> usize {
        self.kinds.len()
    }

    /// H * x for a full state vector.
    pub fn apply(&self, x: &[T]) -> Result<Vec<T>, SeError> {
        let n = self.n_buses;
        if x.len() != n {
            return Err(SeError::StateDimension {
                expected: n,
                got: x.len(),
            });
        }
        Ok((0..self.n_measurements())
            .map(|r| (0..n).map(|c| self.h[r * n + c] * x[c]).sum())
            .collect())
    }

    /// Unweighted least squares with the reference angle anchored at 0.
    pub fn estimate_states(&self, z: &[T]) -> Result<StateEstimate<T>, SeError> {
        let n = self.n_buses;
        let m = self.n_measurements();
        if z.len() != m {
            return Err(SeError::Dimension {
                expected: m,
                got: z.len(),
            });
        }
        // normal equations on H with the reference column removed
        let nr = n - 1;
        let col = |j: usize| if j < self.reference { j } else { j + 1 };
        let mut ata = vec![T::zero(); nr * nr];
        let mut atz = vec![T::zero(); nr];
        for r in 0..m {
            for a in 0..nr {
                let ha = self.h[r * n + col(a)];
                if ha == T::zero() {
                    continue;
                }
                atz[a] = atz[a] + ha * z[r];
                for b in a..nr {
                    ata[a * nr + b] = ata[a * nr + b] + ha * self.h[r * n + col(b)];
                }
            }
        }
        for a in 0..nr {
            for b in 0..a {
                ata[a * nr + b] = ata[b * nr + a];
            }
        }
        let factor = DenseCholesky::factor(nr, &ata).map_err(|_| SeError::RankDeficient)?;
        let xr = factor.solve(&atz);
        let mut angles = vec![T::zero(); n];
        for a in 0..nr {
            angles[col(a)] = xr[a];
        }
        let fitted = self.apply(&angles)?;
        let residual_norm = z
            .iter()
            .zip(&fitted)
            .map(|(&zi, &fi)| (zi - fi) * (zi - fi))
            .sum::<T>()
            .sqrt();
        Ok(StateEstimate {
            angles,
            residual_norm,
        })
    }

    /// Attack vector a = H c for a state-error vector c (reference entry 0).
    /// Adding it to any measurement set leaves the residual norm unchanged.
    pub fn craft_bypass(&self, c: &[T]) -> Result<Vec<T>, SeError> {
        if c.len() != self.n_buses {
            return Err(SeError::StateDimension {
                expected: self.n_buses,
                got: c.len(),
            });
        }
        if c[self.reference] != T::zero() {
            return Err(SeError::NonzeroReference);
        }
        self.apply(c)
    }
}

/// State-error vector c realizing the given per-bus load deviations through
/// the injection rows: a positive deviation at a bus lowers its net
/// injection by the same amount. The deviations must (approximately) sum to
/// zero for the realization to be exact at the reference bus too.
pub fn deviations_to_state_error<T: Scalar>(
    sys: &SusceptanceSystem<T>,
    deltas: &[T],
) -> Result<Vec<T>, SeError> {
    let n = sys.n_buses();
    if deltas.len() != n {
        return Err(SeError::StateDimension {
            expected: n,
            got: deltas.len(),
        });
    }
    let neg: Vec<T> = deltas.iter().map(|&d| -d).collect();
    // reuse the reduced susceptance factorization: B c = -deltas, c_ref = 0
    let b = sys.b_dense();
    let slack = sys.slack();
    let nr = n - 1;
    let col = |j: usize| if j < slack { j } else { j + 1 };
    let mut bred = vec![T::zero(); nr * nr];
    let mut rhs = vec![T::zero(); nr];
    for a in 0..nr {
        rhs[a] = neg[col(a)];
        for bb in 0..nr {
            bred[a * nr + bb] = b[col(a) * n + col(bb)];
        }
    }
    let factor = DenseCholesky::factor(nr, &bred).map_err(|_| SeError::RankDeficient)?;
    let cr = factor.solve(&rhs);
    let mut c = vec![T::zero(); n];
    for a in 0..nr {
        c[col(a)] = cr[a];
    }
    Ok(c)
}
