use super::{Branch, Bus, Generator, GridCase, GridError};
use crate::scalar::Scalar;

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Bus,
    Branch,
    Gen,
}

fn num<T: Scalar>(tok: &str, line: usize) -> Result<T, GridError> {
    tok.parse::<f64>()
        .map(T::c)
        .map_err(|_| GridError::Parse {
            line,
            msg: format!("expected a number, found `{tok}`"),
        })
}

fn int(tok: &str, line: usize) -> Result<usize, GridError> {
    tok.parse::<usize>().map_err(|_| GridError::Parse {
        line,
        msg: format!("expected an integer, found `{tok}`"),
    })
}

/// Parse the plaintext case format: sections headed `BUS`, `BRANCH`, `GEN`,
/// whitespace-separated columns, `#` comments. Loads and ratings are in MW.
pub fn parse_case<T: Scalar>(text: &str) -> Result<GridCase<T>, GridError> {
    let mut section = Section::None;
    let mut buses: Vec<Bus<T>> = Vec::new();
    let mut base_mva = T::c(100.0);
    // (id, from_ext, to_ext, x, rating, line)
    let mut raw_branches: Vec<(usize, usize, usize, T, T, usize)> = Vec::new();
    let mut raw_gens: Vec<(usize, usize, T, T, T, usize)> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks[0].to_ascii_uppercase().as_str() {
            "BUS" => {
                section = Section::Bus;
                continue;
            }
            "BRANCH" => {
                section = Section::Branch;
                continue;
            }
            "GEN" => {
                section = Section::Gen;
                continue;
            }
            "BASEMVA" => {
                if toks.len() != 2 {
                    return Err(GridError::Parse {
                        line: lineno,
                        msg: "BASEMVA takes one value".into(),
                    });
                }
                base_mva = num(toks[1], lineno)?;
                continue;
            }
            _ => {}
        }
        match section {
            Section::None => {
                return Err(GridError::Parse {
                    line: lineno,
                    msg: format!("data before a section header: `{line}`"),
                })
            }
            Section::Bus => {
                if toks.len() != 3 {
                    return Err(GridError::Parse {
                        line: lineno,
                        msg: "BUS row needs 3 columns: id load_MW ref_flag".into(),
                    });
                }
                let id = int(toks[0], lineno)?;
                if buses.iter().any(|b| b.id == id) {
                    return Err(GridError::DuplicateBus(id));
                }
                buses.push(Bus {
                    id,
                    load: num(toks[1], lineno)?,
                    is_reference: toks[2] == "1",
                });
            }
            Section::Branch => {
                if toks.len() != 5 {
                    return Err(GridError::Parse {
                        line: lineno,
                        msg: "BRANCH row needs 5 columns: id from to reactance_pu rating_MW"
                            .into(),
                    });
                }
                raw_branches.push((
                    int(toks[0], lineno)?,
                    int(toks[1], lineno)?,
                    int(toks[2], lineno)?,
                    num(toks[3], lineno)?,
                    num(toks[4], lineno)?,
                    lineno,
                ));
            }
            Section::Gen => {
                if toks.len() != 5 {
                    return Err(GridError::Parse {
                        line: lineno,
                        msg: "GEN row needs 5 columns: id bus cost pmin_MW pmax_MW".into(),
                    });
                }
                raw_gens.push((
                    int(toks[0], lineno)?,
                    int(toks[1], lineno)?,
                    num(toks[2], lineno)?,
                    num(toks[3], lineno)?,
                    num(toks[4], lineno)?,
                    lineno,
                ));
            }
        }
    }

    if buses.is_empty() {
        return Err(GridError::Empty);
    }
    if !buses.iter().any(|b| b.is_reference) {
        return Err(GridError::NoReference);
    }

    let lookup = |ext: usize| buses.iter().position(|b| b.id == ext);
    let mut branches = Vec::with_capacity(raw_branches.len());
    for (id, f, t, x, r, _line) in raw_branches {
        let from = lookup(f).ok_or(GridError::DanglingBus { branch: id, bus: f })?;
        let to = lookup(t).ok_or(GridError::DanglingBus { branch: id, bus: t })?;
        branches.push(Branch {
            id,
            from,
            to,
            reactance: x,
            rating: r,
        });
    }
    let mut generators = Vec::with_capacity(raw_gens.len());
    for (id, b, cost, pmin, pmax, _line) in raw_gens {
        let bus = lookup(b).ok_or(GridError::DanglingGenBus { gen: id, bus: b })?;
        generators.push(Generator {
            id,
            bus,
            cost,
            p_min: pmin,
            p_max: pmax,
        });
    }

    Ok(GridCase {
        buses,
        branches,
        generators,
        base_mva,
    })
}

/// Emit the documented plaintext format. `parse_case(serialize_case(c))`
/// reproduces `c` on the documented field set.
pub fn serialize_case<T: Scalar>(case: &GridCase<T>) -> String {
    let mut out = String::new();
    out.push_str(&format!("BASEMVA {}\n", case.base_mva));
    out.push_str("BUS\n");
    for b in &case.buses {
        out.push_str(&format!(
            "{} {} {}\n",
            b.id,
            b.load,
            if b.is_reference { 1 } else { 0 }
        ));
    }
    out.push_str("BRANCH\n");
    for br in &case.branches {
        out.push_str(&format!(
            "{} {} {} {} {}\n",
            br.id, case.buses[br.from].id, case.buses[br.to].id, br.reactance, br.rating
        ));
    }
    out.push_str("GEN\n");
    for g in &case.generators {
        out.push_str(&format!(
            "{} {} {} {} {}\n",
            g.id, case.buses[g.bus].id, g.cost, g.p_min, g.p_max
        ));
    }
    out
}
