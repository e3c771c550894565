//! The core load-redistribution problem: maximize the flow change on a
//! target branch over zero-sum load deviations bounded by a fraction of each
//! forecasted load. Solved exactly by a two-ended greedy saturation over the
//! PTDF ordering, with an LP route kept as an independent cross-check.

use crate::dc::{flows_from_ptdf, PtdfMatrix};
use crate::dispatch::{solve_dcopf, DispatchError};
use crate::grid::GridCase;
use crate::lp::{solve_lp, Cmp, LpProblem, LpStatus, Sense};
use crate::scalar::Scalar;

/// Default cap on the load shift factor.
pub const ALPHA_CAP_DEFAULT: f64 = 0.10;
/// Default search step for the minimum damaging shift factor.
pub const ALPHA_STEP_DEFAULT: f64 = 0.0025;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Positive,
    Negative,
}

impl Direction {
    pub fn sign<T: Scalar>(self) -> T {
        match self {
            Direction::Positive => T::one(),
            Direction::Negative => -T::one(),
        }
    }
}

/// Per-bus load deviations in MW. `alpha` records the shift factor used to
/// generate the vector; `None` marks exogenous data (noise, measurements).
#[derive(Debug, Clone)]
pub struct DeviationVector<T: Scalar> {
    pub deltas: Vec<T>,
    pub alpha: Option<T>,
}

#[derive(Debug, Clone, Copy)]
pub struct AttackSpec<T: Scalar> {
    pub target_branch: usize,
    pub direction: Direction,
    pub alpha: T,
}

/// Per-bus deviation bounds: alpha * L_i, pinned to 0 at zero-load buses.
pub fn bounds_from_loads<T: Scalar>(loads: &[T], alpha: T) -> Vec<T> {
    loads
        .iter()
        .map(|&l| if l > T::zero() { alpha * l } else { T::zero() })
        .collect()
}

/// Two-ended greedy fill: buses sorted by the signed PTDF, positive
/// deviations assigned from the top, negative from the bottom, each side
/// saturating its bound, the meeting bus left partial so the sum is zero.
pub fn greedy_with_bounds<T: Scalar>(signed_row: &[T], upper: &[T]) -> Vec<T> {
    assert_eq!(signed_row.len(), upper.len());
    let mut deltas = vec![T::zero(); upper.len()];
    let mut order: Vec<usize> = (0..upper.len()).filter(|&i| upper[i] > T::zero()).collect();
    // stable sort: equal PTDFs keep bus order
    order.sort_by(|&a, &b| signed_row[b].partial_cmp(&signed_row[a]).unwrap());
    if order.len() < 2 {
        return deltas;
    }
    let (mut lo, mut hi) = (0usize, order.len() - 1);
    let mut rem_top = upper[order[lo]];
    let mut rem_bot = upper[order[hi]];
    while lo < hi {
        let m = rem_top.min(rem_bot);
        deltas[order[lo]] = deltas[order[lo]] + m;
        deltas[order[hi]] = deltas[order[hi]] - m;
        rem_top = rem_top - m;
        rem_bot = rem_bot - m;
        if rem_top <= T::zero() {
            deltas[order[lo]] = upper[order[lo]]; // snap to the exact bound
            lo += 1;
            if lo >= hi && rem_bot <= T::zero() {
                break;
            }
            rem_top = upper[order[lo]] - deltas[order[lo]];
        }
        if rem_bot <= T::zero() && lo < hi {
            deltas[order[hi]] = -upper[order[hi]];
            hi -= 1;
            rem_bot = upper[order[hi]] + deltas[order[hi]];
        }
    }
    deltas
}

/// Optimal solution of the core problem for one target row.
pub fn greedy_best_attack<T: Scalar>(
    ptdf_row: &[T],
    loads: &[T],
    spec: &AttackSpec<T>,
) -> DeviationVector<T> {
    let upper = bounds_from_loads(loads, spec.alpha);
    let sign: T = spec.direction.sign();
    let signed: Vec<T> = ptdf_row.iter().map(|&p| p * sign).collect();
    DeviationVector {
        deltas: greedy_with_bounds(&signed, &upper),
        alpha: Some(spec.alpha),
    }
}

/// Same contract as [`greedy_best_attack`], realized through the LP solver.
pub fn lp_best_attack<T: Scalar>(
    ptdf_row: &[T],
    loads: &[T],
    spec: &AttackSpec<T>,
) -> Result<DeviationVector<T>, LpStatus> {
    let n = loads.len();
    let upper = bounds_from_loads(loads, spec.alpha);
    let sign: T = spec.direction.sign();
    let mut p = LpProblem::new(
        Sense::Maximize,
        ptdf_row.iter().map(|&v| v * sign).collect::<Vec<_>>(),
    );
    for i in 0..n {
        p.bound(i, -upper[i], upper[i]);
    }
    p.constrain((0..n).map(|i| (i, T::one())).collect(), Cmp::Eq, T::zero());
    let sol = solve_lp(&p);
    match sol.status {
        LpStatus::Optimal => Ok(DeviationVector {
            deltas: sol.values,
            alpha: Some(spec.alpha),
        }),
        other => Err(other),
    }
}

/// Flow change on the target: direction * sum_i delta_i * ptdf_i, in MW.
pub fn attack_objective<T: Scalar>(
    dev: &DeviationVector<T>,
    ptdf_row: &[T],
    direction: Direction,
) -> T {
    let sign: T = direction.sign();
    dev.deltas
        .iter()
        .zip(ptdf_row)
        .map(|(&d, &p)| d * p)
        .sum::<T>()
        * sign
}

/// Pairwise optimality condition: whenever the (direction-adjusted) PTDF of
/// bus i exceeds that of bus j, bus i is at its upper bound or bus j at its
/// lower bound. Infeasible inputs are rejected (returns false).
pub fn verify_optimality<T: Scalar>(
    deltas: &[T],
    ptdf_row: &[T],
    upper: &[T],
    direction: Direction,
) -> bool {
    let n = deltas.len();
    if ptdf_row.len() != n || upper.len() != n {
        return false;
    }
    let tol = T::c(1e-9);
    let mut sum = T::zero();
    for i in 0..n {
        if deltas[i].abs() > upper[i] + tol {
            return false;
        }
        sum = sum + deltas[i];
    }
    if sum.abs() > tol * T::c(10.0) {
        return false;
    }
    let sign: T = direction.sign();
    // condition fails iff some bus below its upper bound outranks some bus
    // above its lower bound
    let mut max_q_slack_up = T::neg_infinity();
    let mut min_q_slack_down = T::infinity();
    for i in 0..n {
        if upper[i] <= T::zero() {
            continue; // pinned at zero, at both bounds at once
        }
        let q = ptdf_row[i] * sign;
        let at_tol = tol.max(upper[i] * T::c(1e-12));
        if deltas[i] < upper[i] - at_tol && q > max_q_slack_up {
            max_q_slack_up = q;
        }
        if deltas[i] > -upper[i] + at_tol && q < min_q_slack_down {
            min_q_slack_down = q;
        }
    }
    max_q_slack_up <= min_q_slack_down
}

/// Damaging direction for a target: follows the pre-attack DCOPF flow, with
/// a zero flow counted as positive.
pub fn attack_direction<T: Scalar>(
    case: &GridCase<T>,
    ptdf: &PtdfMatrix<T>,
    target: usize,
) -> Result<Direction, DispatchError> {
    let loads = case.loads();
    let sol = solve_dcopf(case, ptdf, &loads)?;
    Ok(if sol.cyber_flows[target] >= T::zero() {
        Direction::Positive
    } else {
        Direction::Negative
    })
}

/// How "damaging enough" is decided when searching for the minimum shift
/// factor.
#[derive(Debug, Clone, Copy)]
pub enum AlphaMinMode<T: Scalar> {
    /// Full falsify -> DCOPF -> DCPF pipeline; qualifies when the physical
    /// flow magnitude exceeds the target rating.
    Pipeline,
    /// Qualifies when the best-attack flow deviation reaches the threshold.
    Deviation { threshold: T },
}

/// Deviation-mode search needing only the target row and loads.
pub fn alpha_min_deviation<T: Scalar>(
    ptdf_row: &[T],
    loads: &[T],
    direction: Direction,
    threshold: T,
    step: T,
    alpha_cap: T,
) -> Option<T> {
    let mut k = 1usize;
    loop {
        let alpha = step * T::from_usize(k).unwrap();
        if alpha > alpha_cap + step * T::c(1e-9) {
            return None;
        }
        let spec = AttackSpec {
            target_branch: 0,
            direction,
            alpha,
        };
        let dev = greedy_best_attack(ptdf_row, loads, &spec);
        if attack_objective(&dev, ptdf_row, direction) >= threshold {
            return Some(alpha);
        }
        k += 1;
    }
}

/// Smallest grid point of the shift factor whose best attack qualifies under
/// `mode`; `None` when the target is not attackable within the cap.
/// Pipeline-mode DCOPF infeasibilities skip that grid point.
pub fn find_alpha_min<T: Scalar>(
    case: &GridCase<T>,
    ptdf: &PtdfMatrix<T>,
    target: usize,
    mode: AlphaMinMode<T>,
    step: T,
    alpha_cap: T,
) -> Result<Option<T>, DispatchError> {
    let loads = case.loads();
    let row = ptdf.row(target).to_vec();
    if row.iter().all(|&p| p.abs() < T::c(1e-12)) {
        return Ok(None);
    }
    let direction = attack_direction(case, ptdf, target)?;
    match mode {
        AlphaMinMode::Deviation { threshold } => Ok(alpha_min_deviation(
            &row, &loads, direction, threshold, step, alpha_cap,
        )),
        AlphaMinMode::Pipeline => {
            let rating = case.branches[target].rating;
            let mut k = 1usize;
            loop {
                let alpha = step * T::from_usize(k).unwrap();
                if alpha > alpha_cap + step * T::c(1e-9) {
                    return Ok(None);
                }
                k += 1;
                let spec = AttackSpec {
                    target_branch: target,
                    direction,
                    alpha,
                };
                let dev = greedy_best_attack(&row, &loads, &spec);
                let falsified: Vec<T> = loads
                    .iter()
                    .zip(&dev.deltas)
                    .map(|(&l, &d)| (l + d).max(T::zero()))
                    .collect();
                let dispatch = match solve_dcopf(case, ptdf, &falsified) {
                    Ok(d) => d,
                    Err(DispatchError::Infeasible) => continue,
                    Err(e) => return Err(e),
                };
                let mut inj = vec![T::zero(); case.n_buses()];
                for (j, g) in case.generators.iter().enumerate() {
                    inj[g.bus] = inj[g.bus] + dispatch.dispatch[j];
                }
                for i in 0..case.n_buses() {
                    inj[i] = inj[i] - loads[i];
                }
                // clamping falsified loads at zero can leave a net residual;
                // it belongs on the reference bus (zero PTDF column)
                let net: T = inj.iter().copied().sum();
                inj[ptdf.reference] = inj[ptdf.reference] - net;
                let physical = flows_from_ptdf(ptdf, &inj).expect("balanced by construction");
                if physical[target].abs() > rating + T::c(1e-9) {
                    return Ok(Some(alpha));
                }
            }
        }
    }
}
