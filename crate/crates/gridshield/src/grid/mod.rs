//! Grid case data model: buses, branches, generators, and the validation
//! and modification rules applied before any numeric work.

mod matpower;
mod parse;

pub use matpower::convert_matpower;
pub use parse::{parse_case, serialize_case};

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Bus<T: Scalar> {
    /// External (file) id. Internal indexing is the position in
    /// `GridCase::buses`.
    pub id: usize,
    /// Active load in MW.
    pub load: T,
    pub is_reference: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch<T: Scalar> {
    pub id: usize,
    /// Internal bus indices. Positive flow orientation is from -> to.
    pub from: usize,
    pub to: usize,
    /// Per-unit reactance, > 0.
    pub reactance: T,
    /// Continuous thermal rating in MW.
    pub rating: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generator<T: Scalar> {
    pub id: usize,
    /// Internal bus index.
    pub bus: usize,
    /// Production cost, $/MWh.
    pub cost: T,
    pub p_min: T,
    pub p_max: T,
}

#[derive(Debug, Clone)]
pub struct GridCase<T: Scalar> {
    pub buses: Vec<Bus<T>>,
    pub branches: Vec<Branch<T>>,
    pub generators: Vec<Generator<T>>,
    pub base_mva: T,
}

#[derive(Debug, thiserror::Error)]
pub enum GridError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("duplicate bus id {0}")]
    DuplicateBus(usize),
    #[error("branch {branch} references unknown bus {bus}")]
    DanglingBus { branch: usize, bus: usize },
    #[error("generator {gen} references unknown bus {bus}")]
    DanglingGenBus { gen: usize, bus: usize },
    #[error("no reference bus designated")]
    NoReference,
    #[error("case has no buses")]
    Empty,
}

/// A single violation found by [`GridCase::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// The network splits into islands; carries the external bus ids of the
    /// smallest island.
    Disconnected { island: Vec<usize> },
    NegativeLoad { bus: usize },
    NonPositiveReactance { branch: usize },
    NonPositiveRating { branch: usize },
    SelfLoop { branch: usize },
    BadGeneratorBounds { gen: usize },
    /// Total generation capacity below total load, in MW.
    CapacityShortfall { load: f64, capacity: f64 },
    ReferenceCount { count: usize },
}

#[derive(Debug, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl<T: Scalar> GridCase<T> {
    pub fn n_buses(&self) -> usize {
        self.buses.len()
    }

    pub fn n_branches(&self) -> usize {
        self.branches.len()
    }

    /// Internal index of the reference bus.
    pub fn reference(&self) -> usize {
        self.buses
            .iter()
            .position(|b| b.is_reference)
            .expect("validated case has a reference bus")
    }

    pub fn bus_index(&self, external_id: usize) -> Option<usize> {
        self.buses.iter().position(|b| b.id == external_id)
    }

    pub fn branch_index(&self, external_id: usize) -> Option<usize> {
        self.branches.iter().position(|b| b.id == external_id)
    }

    /// Branch lookup by endpoint external ids, either orientation.
    pub fn branch_between(&self, a: usize, b: usize) -> Option<usize> {
        let (ia, ib) = (self.bus_index(a)?, self.bus_index(b)?);
        self.branches
            .iter()
            .position(|br| (br.from == ia && br.to == ib) || (br.from == ib && br.to == ia))
    }

    pub fn loads(&self) -> Vec<T> {
        self.buses.iter().map(|b| b.load).collect()
    }

    pub fn total_load(&self) -> T {
        self.buses.iter().map(|b| b.load).sum()
    }

    /// Scale every branch rating and optionally zero out negative loads.
    /// Pure transformation, idempotent for `rating_scale = 1`.
    pub fn apply_modifications(&self, rating_scale: T, zero_negative_loads: bool) -> Self {
        assert!(rating_scale > T::zero(), "rating_scale must be positive");
        let mut out = self.clone();
        for br in &mut out.branches {
            br.rating = br.rating * rating_scale;
        }
        if zero_negative_loads {
            for bus in &mut out.buses {
                if bus.load < T::zero() {
                    bus.load = T::zero();
                }
            }
        }
        out
    }

    /// Check every structural invariant; violations are report entries, not
    /// failures.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let n = self.n_buses();

        let refs = self.buses.iter().filter(|b| b.is_reference).count();
        if refs != 1 {
            report.violations.push(Violation::ReferenceCount { count: refs });
        }
        for bus in &self.buses {
            if bus.load < T::zero() {
                report.violations.push(Violation::NegativeLoad { bus: bus.id });
            }
        }
        for br in &self.branches {
            if br.from == br.to {
                report.violations.push(Violation::SelfLoop { branch: br.id });
            }
            if br.reactance <= T::zero() {
                report
                    .violations
                    .push(Violation::NonPositiveReactance { branch: br.id });
            }
            if br.rating <= T::zero() {
                report
                    .violations
                    .push(Violation::NonPositiveRating { branch: br.id });
            }
        }
        for g in &self.generators {
            if g.p_min < T::zero() || g.p_min > g.p_max {
                report.violations.push(Violation::BadGeneratorBounds { gen: g.id });
            }
        }

        // connectivity via union-find
        if n > 0 {
            let mut parent: Vec<usize> = (0..n).collect();
            fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
                while parent[x] != x {
                    parent[x] = parent[parent[x]];
                    x = parent[x];
                }
                x
            }
            for br in &self.branches {
                if br.from < n && br.to < n {
                    let (a, b) = (find(&mut parent, br.from), find(&mut parent, br.to));
                    parent[a] = b;
                }
            }
            let mut components: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
            for i in 0..n {
                let r = find(&mut parent, i);
                components.entry(r).or_default().push(i);
            }
            if components.len() > 1 {
                let smallest = components.values().min_by_key(|c| c.len()).unwrap();
                report.violations.push(Violation::Disconnected {
                    island: smallest.iter().map(|&i| self.buses[i].id).collect(),
                });
            }
        }

        let total_load = self.total_load().to_f64_lossy();
        let capacity: f64 = self
            .generators
            .iter()
            .map(|g| g.p_max.to_f64_lossy())
            .sum();
        if capacity < total_load {
            report.violations.push(Violation::CapacityShortfall {
                load: total_load,
                capacity,
            });
        }

        report
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn fixture_is_valid() {
        let case = fixtures::case3::<f64>();
        assert!(case.validate().is_valid());
        assert_eq!(case.n_buses(), 3);
        assert_eq!(case.n_branches(), 3);
    }

    #[test]
    fn modifications_scale_ratings_and_zero_loads() {
        let mut case = fixtures::case3::<f64>();
        case.buses[2].load = -5.0;
        let m = case.apply_modifications(0.8, true);
        assert_eq!(m.branches[0].rating, 30.0 * 0.8);
        assert_eq!(m.buses[2].load, 0.0);
        // identity
        let id = case.apply_modifications(1.0, false);
        assert_eq!(id.branches[0].rating, case.branches[0].rating);
        assert_eq!(id.buses[2].load, -5.0);
        // idempotence
        let twice = m.apply_modifications(1.0, true);
        assert_eq!(twice.buses[2].load, 0.0);
        assert_eq!(twice.branches[0].rating, m.branches[0].rating);
    }

    #[test]
    fn detects_disconnection_naming_smaller_island() {
        let mut case = fixtures::case3::<f64>();
        // add an isolated pair of buses
        case.buses.push(Bus {
            id: 10,
            load: 0.0,
            is_reference: false,
        });
        case.buses.push(Bus {
            id: 11,
            load: 0.0,
            is_reference: false,
        });
        case.branches.push(Branch {
            id: 9,
            from: 3,
            to: 4,
            reactance: 0.1,
            rating: 10.0,
        });
        let report = case.validate();
        assert!(report.violations.iter().any(|v| matches!(
            v,
            Violation::Disconnected { island } if island == &vec![10, 11]
        )));
    }

    #[test]
    fn detects_capacity_shortfall() {
        let mut case = fixtures::case3::<f64>();
        for g in &mut case.generators {
            g.p_max = 50.0;
        }
        let report = case.validate();
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::CapacityShortfall { .. })));
    }
}
