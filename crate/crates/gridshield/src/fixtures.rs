//! Small reference systems used by tests, docs, and the CLI examples.

use crate::grid::{Branch, Bus, Generator, GridCase};
use crate::scalar::Scalar;

/// 3-bus triangle: two 100 MW loads, generation at every bus, line 1 (A-B)
/// rated 30 MW, bus C is the reference. Reactance ratio 0.2 : 0.4 : 0.4.
pub fn case3<T: Scalar>() -> GridCase<T> {
    GridCase {
        buses: vec![
            Bus { id: 1, load: T::c(100.0), is_reference: false }, // A
            Bus { id: 2, load: T::c(100.0), is_reference: false }, // B
            Bus { id: 3, load: T::c(0.0), is_reference: true },    // C
        ],
        branches: vec![
            Branch { id: 1, from: 0, to: 1, reactance: T::c(0.2), rating: T::c(30.0) },
            Branch { id: 2, from: 1, to: 2, reactance: T::c(0.4), rating: T::c(100.0) },
            Branch { id: 3, from: 0, to: 2, reactance: T::c(0.4), rating: T::c(100.0) },
        ],
        generators: vec![
            Generator { id: 1, bus: 0, cost: T::c(50.0), p_min: T::c(0.0), p_max: T::c(150.0) },
            Generator { id: 2, bus: 1, cost: T::c(80.0), p_min: T::c(0.0), p_max: T::c(150.0) },
            Generator { id: 3, bus: 2, cost: T::c(500.0), p_min: T::c(0.0), p_max: T::c(150.0) },
        ],
        base_mva: T::c(100.0),
    }
}

/// 6-bus illustrative data: forecasted loads per bus.
pub fn case6_loads<T: Scalar>() -> Vec<T> {
    [10.0, 15.0, 15.0, 30.0, 20.0, 10.0]
        .iter()
        .map(|&v| T::c(v))
        .collect()
}

/// 6-bus PTDF row for the vulnerable line 3-5.
pub fn case6_ptdf_row<T: Scalar>() -> Vec<T> {
    [0.0, 0.062, 0.289, 0.0183, -0.1207, 0.152]
        .iter()
        .map(|&v| T::c(v))
        .collect()
}

/// First random deviation vector of the 6-bus example (the disguised attack).
pub fn case6_a1<T: Scalar>() -> Vec<T> {
    [-0.456, -0.127, 1.136, -0.564, -0.751, 0.762]
        .iter()
        .map(|&v| T::c(v))
        .collect()
}

/// Second random deviation vector of the 6-bus example (plain noise).
pub fn case6_a2<T: Scalar>() -> Vec<T> {
    [0.976, -0.954, 1.143, -2.051, 1.519, -0.633]
        .iter()
        .map(|&v| T::c(v))
        .collect()
}
