//! DC optimal power flow in the PTDF (injection-shift) formulation: least
//! cost dispatch meeting the given loads subject to generator bounds and
//! branch thermal ratings. This is the system's response to whatever loads
//! it is told about, true or falsified.

use crate::dc::PtdfMatrix;
use crate::grid::GridCase;
use crate::lp::{solve_lp, Cmp, LpProblem, LpStatus, Sense};
use crate::scalar::Scalar;

#[derive(Debug, thiserror::Error)]
pub enum DispatchError {
    #[error("dispatch infeasible: loads cannot be served within ratings and capacities")]
    Infeasible,
    #[error("LP solver failed: {0:?}")]
    Solver(LpStatus),
    #[error("loads vector has {got} entries, case has {expected} buses")]
    Dimension { expected: usize, got: usize },
    #[error("negative load at bus index {0}")]
    NegativeLoad(usize),
}

#[derive(Debug, Clone)]
pub struct DispatchSolution<T: Scalar> {
    /// MW per generator, in case order.
    pub dispatch: Vec<T>,
    pub total_cost: T,
    /// Branch flows implied by the dispatched injections and the loads the
    /// DCOPF was given. These are what the control room sees.
    pub cyber_flows: Vec<T>,
}

/// Minimize generation cost subject to energy balance, generator bounds,
/// and |PTDF * injections| <= ratings.
pub fn solve_dcopf<T: Scalar>(
    case: &GridCase<T>,
    ptdf: &PtdfMatrix<T>,
    loads: &[T],
) -> Result<DispatchSolution<T>, DispatchError> {
    let n = case.n_buses();
    if loads.len() != n {
        return Err(DispatchError::Dimension {
            expected: n,
            got: loads.len(),
        });
    }
    if let Some(i) = loads.iter().position(|&l| l < T::zero()) {
        return Err(DispatchError::NegativeLoad(i));
    }

    let gens = &case.generators;
    let mut problem = LpProblem::new(
        Sense::Minimize,
        gens.iter().map(|g| g.cost).collect::<Vec<_>>(),
    );
    for (j, g) in gens.iter().enumerate() {
        problem.bound(j, g.p_min, g.p_max);
    }
    let total_load: T = loads.iter().copied().sum();
    problem.constrain(
        (0..gens.len()).map(|j| (j, T::one())).collect(),
        Cmp::Eq,
        total_load,
    );
    for (k, br) in case.branches.iter().enumerate() {
        let row = ptdf.row(k);
        // flow_k = sum_g ptdf[bus_g] P_g - load_part
        let load_part: T = row.iter().zip(loads).map(|(&p, &l)| p * l).sum();
        let coeffs: Vec<(usize, T)> = gens
            .iter()
            .enumerate()
            .map(|(j, g)| (j, row[g.bus]))
            .filter(|&(_, c)| c != T::zero())
            .collect();
        if coeffs.is_empty() {
            continue;
        }
        problem.constrain(coeffs.clone(), Cmp::Le, br.rating + load_part);
        problem.constrain(coeffs, Cmp::Ge, -br.rating + load_part);
    }

    let sol = solve_lp(&problem);
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(DispatchError::Infeasible),
        other => return Err(DispatchError::Solver(other)),
    }

    let dispatch = sol.values;
    let total_cost = sol.objective_value;
    let mut injections = vec![T::zero(); n];
    for (j, g) in gens.iter().enumerate() {
        injections[g.bus] = injections[g.bus] + dispatch[j];
    }
    for i in 0..n {
        injections[i] = injections[i] - loads[i];
    }
    let cyber_flows = ptdf
        .rows
        .iter()
        .map(|row| row.iter().zip(&injections).map(|(&p, &x)| p * x).sum())
        .collect();

    Ok(DispatchSolution {
        dispatch,
        total_cost,
        cyber_flows,
    })
}
