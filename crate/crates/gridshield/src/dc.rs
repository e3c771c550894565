//! DC network model: bus susceptance system, PTDF sensitivities, and DC
//! power flow solves. All public interfaces speak MW; per-unit susceptance
//! is internal, so flows come out in MW directly.

use crate::grid::GridCase;
use crate::linalg::{FactorError, SpdFactor};
use crate::scalar::Scalar;

/// Tolerance on the net injection imbalance accepted by a DC solve (MW).
pub const BALANCE_TOL_MW: f64 = 1e-6;

#[derive(Debug, thiserror::Error)]
pub enum DcError {
    #[error("disconnected network: reduced susceptance system is singular")]
    Disconnected(#[from] FactorError),
    #[error("injections do not balance: net {0} MW exceeds tolerance")]
    Imbalance(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("bus index {0} out of range")]
    BadBus(usize),
    #[error("branch index {0} out of range")]
    BadBranch(usize),
}

/// Factorized DC susceptance model of a connected network.
pub struct SusceptanceSystem<T: Scalar> {
    n: usize,
    slack: usize,
    /// (from, to, b) per branch with b = 1/x in per unit.
    branch_susceptance: Vec<(usize, usize, T)>,
    /// Full symmetric B matrix as triplets (rows sum to zero).
    b_triplets: Vec<(usize, usize, T)>,
    factor: SpdFactor<T>,
}

impl<T: Scalar> SusceptanceSystem<T> {
    /// Assemble and factorize. The reduced system removes the case's
    /// reference row/column; singularity means the network is disconnected.
    pub fn build(case: &GridCase<T>) -> Result<Self, DcError> {
        let n = case.n_buses();
        let slack = case.reference();
        let mut branch_susceptance = Vec::with_capacity(case.n_branches());
        let mut b_triplets = Vec::new();
        let mut reduced = Vec::new();
        let red = |i: usize| if i < slack { i } else { i - 1 };
        for br in &case.branches {
            let b = T::one() / br.reactance;
            branch_susceptance.push((br.from, br.to, b));
            b_triplets.push((br.from, br.from, b));
            b_triplets.push((br.to, br.to, b));
            b_triplets.push((br.from, br.to, -b));
            b_triplets.push((br.to, br.from, -b));
            for &(i, j, v) in &[
                (br.from, br.from, b),
                (br.to, br.to, b),
                (br.from, br.to, -b),
                (br.to, br.from, -b),
            ] {
                if i != slack && j != slack {
                    reduced.push((red(i), red(j), v));
                }
            }
        }
        let factor = SpdFactor::new_triplets(n - 1, &reduced)?;
        Ok(Self {
            n,
            slack,
            branch_susceptance,
            b_triplets,
            factor,
        })
    }

    pub fn n_buses(&self) -> usize {
        self.n
    }

    pub fn slack(&self) -> usize {
        self.slack
    }

    /// Full B matrix, dense row-major. Intended for small systems (the
    /// state-estimation Jacobian); the factorization path never densifies.
    pub fn b_dense(&self) -> Vec<T> {
        let mut b = vec![T::zero(); self.n * self.n];
        for &(i, j, v) in &self.b_triplets {
            b[i * self.n + j] = b[i * self.n + j] + v;
        }
        b
    }

    pub fn branch_susceptances(&self) -> &[(usize, usize, T)] {
        &self.branch_susceptance
    }

    /// Solve B_red * theta_red = p_red and expand with slack angle 0.
    fn solve_angles(&self, p: &[T]) -> Vec<T> {
        let mut rhs = Vec::with_capacity(self.n - 1);
        for i in 0..self.n {
            if i != self.slack {
                rhs.push(p[i]);
            }
        }
        let red = self.factor.solve(&rhs);
        let mut angles = vec![T::zero(); self.n];
        let mut k = 0;
        for i in 0..self.n {
            if i != self.slack {
                angles[i] = red[k];
                k += 1;
            }
        }
        angles
    }

    /// One PTDF row: MW change on branch `k` per MW injected at each bus and
    /// withdrawn at `reference`. The reference column is exactly zero.
    pub fn ptdf_row(&self, k: usize, reference: usize) -> Result<Vec<T>, DcError> {
        if k >= self.branch_susceptance.len() {
            return Err(DcError::BadBranch(k));
        }
        if reference >= self.n {
            return Err(DcError::BadBus(reference));
        }
        let (f, t, b) = self.branch_susceptance[k];
        let mut rhs = vec![T::zero(); self.n];
        rhs[f] = rhs[f] + T::one();
        rhs[t] = rhs[t] - T::one();
        // y = B_red^{-1} (e_f - e_t); row_i = b * y_i with slack entry 0
        let y = self.solve_angles(&rhs);
        let mut row: Vec<T> = y.iter().map(|&v| b * v).collect();
        row[self.slack] = T::zero();
        // re-reference if the requested reference differs from the slack
        let shift = row[reference];
        if shift != T::zero() {
            for v in row.iter_mut() {
                *v = *v - shift;
            }
        }
        row[reference] = T::zero();
        Ok(row)
    }
}

/// Dense branch x bus PTDF table with its reference bus convention.
pub struct PtdfMatrix<T: Scalar> {
    pub rows: Vec<Vec<T>>,
    pub reference: usize,
}

impl<T: Scalar> PtdfMatrix<T> {
    pub fn n_branches(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, k: usize) -> &[T] {
        &self.rows[k]
    }
}

/// Materialize every PTDF row.
pub fn compute_ptdf<T: Scalar>(
    sys: &SusceptanceSystem<T>,
    reference: usize,
) -> Result<PtdfMatrix<T>, DcError> {
    let mut rows = Vec::with_capacity(sys.branch_susceptances().len());
    for k in 0..sys.branch_susceptances().len() {
        rows.push(sys.ptdf_row(k, reference)?);
    }
    Ok(PtdfMatrix { rows, reference })
}

/// Angles and branch flows of one DC power flow solve.
pub struct FlowSolution<T: Scalar> {
    /// Radian-equivalent angles with the slack fixed at exactly 0.
    pub angles: Vec<T>,
    /// MW per branch, positive from -> to.
    pub flows: Vec<T>,
}

fn check_balance<T: Scalar>(injections: &[T], n: usize) -> Result<(), DcError> {
    if injections.len() != n {
        return Err(DcError::Dimension {
            expected: n,
            got: injections.len(),
        });
    }
    let net: T = injections.iter().copied().sum();
    if net.abs() > T::c(BALANCE_TOL_MW) {
        return Err(DcError::Imbalance(net.to_f64_lossy()));
    }
    Ok(())
}

/// DC power flow: injections (MW, summing to ~0) to angles and branch flows.
/// Residual imbalance within tolerance lands on the slack bus.
pub fn solve_dcpf<T: Scalar>(
    sys: &SusceptanceSystem<T>,
    injections: &[T],
) -> Result<FlowSolution<T>, DcError> {
    check_balance(injections, sys.n_buses())?;
    let angles = sys.solve_angles(injections);
    let flows = sys
        .branch_susceptances()
        .iter()
        .map(|&(f, t, b)| b * (angles[f] - angles[t]))
        .collect();
    Ok(FlowSolution { angles, flows })
}

/// Branch flows by superposition: PTDF * injections.
pub fn flows_from_ptdf<T: Scalar>(
    ptdf: &PtdfMatrix<T>,
    injections: &[T],
) -> Result<Vec<T>, DcError> {
    let n = ptdf.rows.first().map(|r| r.len()).unwrap_or(0);
    check_balance(injections, n)?;
    Ok(ptdf
        .rows
        .iter()
        .map(|row| row.iter().zip(injections).map(|(&p, &x)| p * x).sum())
        .collect())
}
