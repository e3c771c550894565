use super::{Branch, Bus, Generator, GridCase, GridError};
use crate::scalar::Scalar;

/// Extract the rows of a `mpc.<name> = [ ... ];` matrix block.
fn matrix_block(text: &str, name: &str) -> Option<Vec<Vec<f64>>> {
    let needle = format!("mpc.{name}");
    let start = text.find(&needle)?;
    let rest = &text[start..];
    let open = rest.find('[')?;
    let close = rest[open..].find(']')? + open;
    let body = &rest[open + 1..close];
    let mut rows = Vec::new();
    for line in body.split(|c| c == ';' || c == '\n') {
        let line = line.split('%').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let row: Result<Vec<f64>, _> = line.split_whitespace().map(|t| t.parse()).collect();
        if let Ok(row) = row {
            if !row.is_empty() {
                rows.push(row);
            }
        }
    }
    Some(rows)
}

fn scalar_value(text: &str, name: &str) -> Option<f64> {
    let needle = format!("mpc.{name}");
    let start = text.find(&needle)?;
    let rest = &text[start..];
    let eq = rest.find('=')?;
    let end = rest[eq..].find(';')? + eq;
    rest[eq + 1..end].trim().parse().ok()
}

/// Convert a MATPOWER-style case into the native model. Only the columns the
/// DC model needs are read: bus id/type/PD, branch endpoints/x/rateA/status,
/// generator bus/status/pmax/pmin, and the linear term of polynomial costs.
/// Out-of-service branches and generators are dropped; a 0 rating (MATPOWER
/// "unlimited") becomes a large finite rating.
pub fn convert_matpower<T: Scalar>(text: &str) -> Result<GridCase<T>, GridError> {
    const UNLIMITED_MW: f64 = 1e6;

    let bus_rows = matrix_block(text, "bus").ok_or(GridError::Parse {
        line: 0,
        msg: "missing mpc.bus block".into(),
    })?;
    let branch_rows = matrix_block(text, "branch").ok_or(GridError::Parse {
        line: 0,
        msg: "missing mpc.branch block".into(),
    })?;
    let gen_rows = matrix_block(text, "gen").unwrap_or_default();
    let gencost_rows = matrix_block(text, "gencost").unwrap_or_default();
    let base_mva = scalar_value(text, "baseMVA").unwrap_or(100.0);

    let mut buses: Vec<Bus<T>> = Vec::with_capacity(bus_rows.len());
    for row in &bus_rows {
        if row.len() < 3 {
            return Err(GridError::Parse {
                line: 0,
                msg: "mpc.bus row has fewer than 3 columns".into(),
            });
        }
        let id = row[0] as usize;
        if buses.iter().any(|b| b.id == id) {
            return Err(GridError::DuplicateBus(id));
        }
        buses.push(Bus {
            id,
            load: T::c(row[2]),
            is_reference: row[1] as i64 == 3,
        });
    }
    if buses.is_empty() {
        return Err(GridError::Empty);
    }
    if !buses.iter().any(|b| b.is_reference) {
        return Err(GridError::NoReference);
    }
    let lookup = |ext: usize| buses.iter().position(|b| b.id == ext);

    let mut branches = Vec::new();
    for (i, row) in branch_rows.iter().enumerate() {
        if row.len() < 6 {
            return Err(GridError::Parse {
                line: 0,
                msg: "mpc.branch row has fewer than 6 columns".into(),
            });
        }
        if row.len() > 10 && row[10] == 0.0 {
            continue; // out of service
        }
        let id = i + 1;
        let (fe, te) = (row[0] as usize, row[1] as usize);
        let from = lookup(fe).ok_or(GridError::DanglingBus { branch: id, bus: fe })?;
        let to = lookup(te).ok_or(GridError::DanglingBus { branch: id, bus: te })?;
        let rating = if row[5] > 0.0 { row[5] } else { UNLIMITED_MW };
        branches.push(Branch {
            id,
            from,
            to,
            reactance: T::c(row[3]),
            rating: T::c(rating),
        });
    }

    let mut generators = Vec::new();
    for (i, row) in gen_rows.iter().enumerate() {
        if row.len() < 10 {
            return Err(GridError::Parse {
                line: 0,
                msg: "mpc.gen row has fewer than 10 columns".into(),
            });
        }
        if row[7] == 0.0 {
            continue; // out of service
        }
        let id = i + 1;
        let be = row[0] as usize;
        let bus = lookup(be).ok_or(GridError::DanglingGenBus { gen: id, bus: be })?;
        let cost = gencost_rows.get(i).map(linear_cost).unwrap_or(0.0);
        generators.push(Generator {
            id,
            bus,
            cost: T::c(cost),
            p_min: T::c(row[9].max(0.0)),
            p_max: T::c(row[8]),
        });
    }

    Ok(GridCase {
        buses,
        branches,
        generators,
        base_mva: T::c(base_mva),
    })
}

/// Linear $/MWh term of a MATPOWER gencost row. Polynomial costs use the
/// degree-1 coefficient; piecewise-linear costs use the first segment slope.
fn linear_cost(row: &Vec<f64>) -> f64 {
    if row.len() < 5 {
        return 0.0;
    }
    let model = row[0] as i64;
    let n = row[3] as usize;
    let coeffs = &row[4..];
    match model {
        2 => {
            // coefficients from highest degree down; linear term is
            // second-to-last when n >= 2
            if n >= 2 && coeffs.len() >= n {
                coeffs[n - 2]
            } else {
                0.0
            }
        }
        1 => {
            if n >= 2 && coeffs.len() >= 4 {
                let (x1, y1, x2, y2) = (coeffs[0], coeffs[1], coeffs[2], coeffs[3]);
                if x2 != x1 {
                    (y2 - y1) / (x2 - x1)
                } else {
                    0.0
                }
            } else {
                0.0
            }
        }
        _ => 0.0,
    }
}
