//! Small dense linear-program solver: two-phase simplex with general
//! comparators and per-variable bounds. Sized for dispatch problems and the
//! attack-oracle LPs, not for industrial-scale programs.

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
pub struct LpConstraint<T: Scalar> {
    /// Sparse (variable, coefficient) pairs.
    pub coeffs: Vec<(usize, T)>,
    pub cmp: Cmp,
    pub rhs: T,
}

#[derive(Debug, Clone)]
pub struct LpProblem<T: Scalar> {
    pub sense: Sense,
    pub objective: Vec<T>,
    /// Per-variable [lo, hi]; +/- infinity allowed.
    pub bounds: Vec<(T, T)>,
    pub constraints: Vec<LpConstraint<T>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Iteration limit or numerical breakdown; never a silent wrong answer.
    Numerical,
}

#[derive(Debug, Clone)]
pub struct LpSolution<T: Scalar> {
    pub status: LpStatus,
    pub values: Vec<T>,
    pub objective_value: T,
}

impl<T: Scalar> LpProblem<T> {
    pub fn new(sense: Sense, objective: Vec<T>) -> Self {
        let n = objective.len();
        Self {
            sense,
            objective,
            bounds: vec![(T::neg_infinity(), T::infinity()); n],
            constraints: Vec::new(),
        }
    }

    pub fn bound(&mut self, var: usize, lo: T, hi: T) -> &mut Self {
        self.bounds[var] = (lo, hi);
        self
    }

    pub fn constrain(&mut self, coeffs: Vec<(usize, T)>, cmp: Cmp, rhs: T) -> &mut Self {
        self.constraints.push(LpConstraint { coeffs, cmp, rhs });
        self
    }
}

const PIVOT_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-7;

/// How an original variable maps into standard-form variables.
enum VarMap<T> {
    /// x = lo + y[idx]
    Shifted { idx: usize, lo: T },
    /// x = hi - y[idx]
    Flipped { idx: usize, hi: T },
    /// x = y[pos] - y[neg]
    Split { pos: usize, neg: usize },
}

struct Tableau<T: Scalar> {
    m: usize,
    n: usize,
    rows: Vec<Vec<T>>, // m rows of n coefficients
    rhs: Vec<T>,
    obj: Vec<T>, // reduced costs
    basis: Vec<usize>,
    artificial_start: usize,
}

impl<T: Scalar> Tableau<T> {
    fn pivot(&mut self, r: usize, s: usize) {
        let piv = self.rows[r][s];
        for v in self.rows[r].iter_mut() {
            *v = *v / piv;
        }
        self.rhs[r] = self.rhs[r] / piv;
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.rows[i][s];
            if f != T::zero() {
                for j in 0..self.n {
                    let d = self.rows[r][j] * f;
                    self.rows[i][j] = self.rows[i][j] - d;
                }
                self.rhs[i] = self.rhs[i] - self.rhs[r] * f;
            }
        }
        let f = self.obj[s];
        if f != T::zero() {
            for j in 0..self.n {
                let d = self.rows[r][j] * f;
                self.obj[j] = self.obj[j] - d;
            }
        }
        self.basis[r] = s;
    }

    /// Run simplex iterations on the current objective row. Columns at or
    /// after `forbid_from` may not enter. Returns Ok(()) at optimality.
    fn iterate(&mut self, forbid_from: usize) -> Result<(), LpStatus> {
        let tol = T::c(PIVOT_TOL);
        let max_iter = 200 * (self.m + self.n) + 5000;
        let bland_after = max_iter / 2;
        for iter in 0..max_iter {
            let bland = iter >= bland_after;
            // entering column
            let mut enter: Option<usize> = None;
            let mut best = -tol;
            for j in 0..forbid_from.min(self.n) {
                let rc = self.obj[j];
                if rc < -tol {
                    if bland {
                        enter = Some(j);
                        break;
                    }
                    if rc < best {
                        best = rc;
                        enter = Some(j);
                    }
                }
            }
            let s = match enter {
                Some(s) => s,
                None => return Ok(()),
            };
            // ratio test
            let mut leave: Option<usize> = None;
            let mut best_ratio = T::infinity();
            for i in 0..self.m {
                let a = self.rows[i][s];
                if a > tol {
                    let ratio = self.rhs[i] / a;
                    let better = ratio < best_ratio - tol
                        || (ratio < best_ratio + tol
                            && leave.map_or(true, |l| self.basis[i] < self.basis[l]));
                    if better {
                        best_ratio = ratio;
                        leave = Some(i);
                    }
                }
            }
            let r = match leave {
                Some(r) => r,
                None => return Err(LpStatus::Unbounded),
            };
            self.pivot(r, s);
        }
        Err(LpStatus::Numerical)
    }
}

/// Solve a linear program with the two-phase simplex method.
pub fn solve_lp<T: Scalar>(problem: &LpProblem<T>) -> LpSolution<T> {
    let n_orig = problem.objective.len();
    assert_eq!(problem.bounds.len(), n_orig, "bounds dimension mismatch");

    let fail = |status: LpStatus| LpSolution {
        status,
        values: vec![T::zero(); n_orig],
        objective_value: T::zero(),
    };

    // map original variables to nonnegative standard-form variables
    let mut maps: Vec<VarMap<T>> = Vec::with_capacity(n_orig);
    let mut n_std = 0usize;
    let mut extra_rows: Vec<LpConstraint<T>> = Vec::new();
    for (j, &(lo, hi)) in problem.bounds.iter().enumerate() {
        if lo.is_finite() {
            maps.push(VarMap::Shifted { idx: n_std, lo });
            if hi.is_finite() {
                extra_rows.push(LpConstraint {
                    coeffs: vec![(j, T::one())],
                    cmp: Cmp::Le,
                    rhs: hi,
                });
            }
            n_std += 1;
        } else if hi.is_finite() {
            maps.push(VarMap::Flipped { idx: n_std, hi });
            n_std += 1;
        } else {
            maps.push(VarMap::Split {
                pos: n_std,
                neg: n_std + 1,
            });
            n_std += 2;
        }
    }

    // expand constraints into standard-form rows with rhs >= 0
    struct Row<T> {
        coeffs: Vec<T>,
        cmp: Cmp,
        rhs: T,
    }
    let mut rows: Vec<Row<T>> = Vec::new();
    for con in problem.constraints.iter().chain(extra_rows.iter()) {
        let mut coeffs = vec![T::zero(); n_std];
        let mut rhs = con.rhs;
        for &(j, c) in &con.coeffs {
            match maps[j] {
                VarMap::Shifted { idx, lo } => {
                    coeffs[idx] = coeffs[idx] + c;
                    rhs = rhs - c * lo;
                }
                VarMap::Flipped { idx, hi } => {
                    coeffs[idx] = coeffs[idx] - c;
                    rhs = rhs - c * hi;
                }
                VarMap::Split { pos, neg } => {
                    coeffs[pos] = coeffs[pos] + c;
                    coeffs[neg] = coeffs[neg] - c;
                }
            }
        }
        let mut cmp = con.cmp;
        if rhs < T::zero() {
            for v in coeffs.iter_mut() {
                *v = -*v;
            }
            rhs = -rhs;
            cmp = match cmp {
                Cmp::Le => Cmp::Ge,
                Cmp::Ge => Cmp::Le,
                Cmp::Eq => Cmp::Eq,
            };
        }
        rows.push(Row { coeffs, cmp, rhs });
    }

    // standard-form objective (minimization); the constant term from bound
    // shifts is irrelevant to pivoting and the reported value is recomputed
    // from the recovered solution
    let mut cost = vec![T::zero(); n_std];
    for j in 0..n_orig {
        let c = match problem.sense {
            Sense::Minimize => problem.objective[j],
            Sense::Maximize => -problem.objective[j],
        };
        match maps[j] {
            VarMap::Shifted { idx, .. } => {
                cost[idx] = cost[idx] + c;
            }
            VarMap::Flipped { idx, .. } => {
                cost[idx] = cost[idx] - c;
            }
            VarMap::Split { pos, neg } => {
                cost[pos] = cost[pos] + c;
                cost[neg] = cost[neg] - c;
            }
        }
    }

    let m = rows.len();
    // columns: structural | slack/surplus | artificial
    let n_slack = rows.iter().filter(|r| r.cmp != Cmp::Eq).count();
    let n_art = rows.iter().filter(|r| r.cmp != Cmp::Le).count();
    let n_total = n_std + n_slack + n_art;
    let art_start = n_std + n_slack;

    let mut t = Tableau {
        m,
        n: n_total,
        rows: Vec::with_capacity(m),
        rhs: Vec::with_capacity(m),
        obj: vec![T::zero(); n_total],
        basis: vec![0; m],
        artificial_start: art_start,
    };
    let mut slack_col = n_std;
    let mut art_col = art_start;
    for (i, row) in rows.iter().enumerate() {
        let mut full = vec![T::zero(); n_total];
        full[..n_std].copy_from_slice(&row.coeffs);
        match row.cmp {
            Cmp::Le => {
                full[slack_col] = T::one();
                t.basis[i] = slack_col;
                slack_col += 1;
            }
            Cmp::Ge => {
                full[slack_col] = -T::one();
                slack_col += 1;
                full[art_col] = T::one();
                t.basis[i] = art_col;
                art_col += 1;
            }
            Cmp::Eq => {
                full[art_col] = T::one();
                t.basis[i] = art_col;
                art_col += 1;
            }
        }
        t.rows.push(full);
        t.rhs.push(row.rhs);
    }

    // phase 1: minimize the artificial sum
    if n_art > 0 {
        for j in 0..n_total {
            let mut rc = if j >= art_start { T::one() } else { T::zero() };
            for i in 0..m {
                if t.basis[i] >= art_start {
                    rc = rc - t.rows[i][j];
                }
            }
            t.obj[j] = rc;
        }
        if let Err(status) = t.iterate(n_total) {
            return fail(status);
        }
        let art_sum: T = (0..m)
            .filter(|&i| t.basis[i] >= art_start)
            .map(|i| t.rhs[i])
            .sum();
        if art_sum > T::c(FEAS_TOL) {
            return fail(LpStatus::Infeasible);
        }
        // pivot remaining zero-level artificials out of the basis
        for i in 0..m {
            if t.basis[i] >= art_start {
                let s = (0..art_start).find(|&j| t.rows[i][j].abs() > T::c(PIVOT_TOL));
                if let Some(s) = s {
                    t.pivot(i, s);
                }
                // otherwise the row is redundant; the artificial stays at 0
            }
        }
    }

    // phase 2: true objective, artificial columns forbidden
    for j in 0..n_total {
        t.obj[j] = if j < n_std { cost[j] } else { T::zero() };
    }
    for i in 0..m {
        let b = t.basis[i];
        let cb = if b < n_std { cost[b] } else { T::zero() };
        if cb != T::zero() {
            for j in 0..n_total {
                let d = t.rows[i][j] * cb;
                t.obj[j] = t.obj[j] - d;
            }
        }
    }
    if let Err(status) = t.iterate(t.artificial_start) {
        return fail(status);
    }

    // recover the standard-form solution, then map back
    let mut y = vec![T::zero(); n_total];
    for i in 0..m {
        y[t.basis[i]] = t.rhs[i];
    }
    let mut values = vec![T::zero(); n_orig];
    for j in 0..n_orig {
        values[j] = match maps[j] {
            VarMap::Shifted { idx, lo } => lo + y[idx],
            VarMap::Flipped { idx, hi } => hi - y[idx],
            VarMap::Split { pos, neg } => y[pos] - y[neg],
        };
    }
    let objective_value: T = (0..n_orig)
        .map(|j| problem.objective[j] * values[j])
        .sum();

    LpSolution {
        status: LpStatus::Optimal,
        values,
        objective_value,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maximizes_single_bounded_variable() {
        let mut p = LpProblem::new(Sense::Maximize, vec![1.0]);
        p.bound(0, 0.0, f64::INFINITY);
        p.constrain(vec![(0, 1.0)], Cmp::Le, 5.0);
        let s = solve_lp(&p);
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.values[0] - 5.0).abs() < 1e-9);
        assert!((s.objective_value - 5.0).abs() < 1e-9);
    }

    #[test]
    fn contradictory_constraints_are_infeasible() {
        let mut p = LpProblem::new(Sense::Maximize, vec![1.0]);
        p.constrain(vec![(0, 1.0)], Cmp::Le, 1.0);
        p.constrain(vec![(0, 1.0)], Cmp::Ge, 2.0);
        let s = solve_lp(&p);
        assert_eq!(s.status, LpStatus::Infeasible);
    }

    #[test]
    fn detects_unbounded_problem() {
        let mut p = LpProblem::new(Sense::Maximize, vec![1.0]);
        p.constrain(vec![(0, 1.0)], Cmp::Ge, 0.0);
        let s = solve_lp(&p);
        assert_eq!(s.status, LpStatus::Unbounded);
    }

    #[test]
    fn solves_equality_and_negative_bounds() {
        // min x + 2y, x + y = 10, -5 <= x <= 4, y free
        let mut p = LpProblem::new(Sense::Minimize, vec![1.0f64, 2.0]);
        p.bound(0, -5.0, 4.0);
        p.constrain(vec![(0, 1.0), (1, 1.0)], Cmp::Eq, 10.0);
        let s = solve_lp(&p);
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.values[0] - 4.0).abs() < 1e-9);
        assert!((s.values[1] - 6.0).abs() < 1e-9);
        assert!((s.objective_value - 16.0).abs() < 1e-9);
    }

    #[test]
    fn classic_two_variable_program() {
        // max 3x + 5y; x <= 4; 2y <= 12; 3x + 2y <= 18; x,y >= 0
        let mut p = LpProblem::new(Sense::Maximize, vec![3.0, 5.0]);
        p.bound(0, 0.0, f64::INFINITY);
        p.bound(1, 0.0, f64::INFINITY);
        p.constrain(vec![(0, 1.0)], Cmp::Le, 4.0);
        p.constrain(vec![(1, 2.0)], Cmp::Le, 12.0);
        p.constrain(vec![(0, 3.0), (1, 2.0)], Cmp::Le, 18.0);
        let s = solve_lp(&p);
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.values[0] - 2.0).abs() < 1e-9);
        assert!((s.values[1] - 6.0).abs() < 1e-9);
        assert!((s.objective_value - 36.0).abs() < 1e-9);
    }

    #[test]
    fn optimal_solutions_satisfy_their_constraints() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let n = rng.gen_range(2..8);
            let mut p = LpProblem::new(
                Sense::Minimize,
                (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect(),
            );
            for j in 0..n {
                let lo = rng.gen_range(-10.0..0.0);
                let hi = rng.gen_range(0.0..10.0);
                p.bound(j, lo, hi);
            }
            let m = rng.gen_range(1..5);
            for _ in 0..m {
                let coeffs: Vec<(usize, f64)> =
                    (0..n).map(|j| (j, rng.gen_range(-3.0..3.0))).collect();
                let cmp = match rng.gen_range(0..3) {
                    0 => Cmp::Le,
                    1 => Cmp::Ge,
                    _ => Cmp::Eq,
                };
                p.constrain(coeffs, cmp, rng.gen_range(-5.0..5.0));
            }
            let s = solve_lp(&p);
            if s.status != LpStatus::Optimal {
                continue;
            }
            for con in &p.constraints {
                let lhs: f64 = con.coeffs.iter().map(|&(j, c)| c * s.values[j]).sum();
                match con.cmp {
                    Cmp::Le => assert!(lhs <= con.rhs + 1e-7),
                    Cmp::Ge => assert!(lhs >= con.rhs - 1e-7),
                    Cmp::Eq => assert!((lhs - con.rhs).abs() <= 1e-7),
                }
            }
            for j in 0..n {
                let (lo, hi) = p.bounds[j];
                assert!(s.values[j] >= lo - 1e-7 && s.values[j] <= hi + 1e-7);
            }
        }
    }
}
