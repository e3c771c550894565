//! Deterministic synthetic cases: a congested two-zone system with one
//! critical tie line, rectangular lattice cases for scale testing, and
//! seeded random connected cases for property checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::{Branch, Bus, Generator, GridCase};

/// Two 26-bus zones joined by a single rated tie line. Zone A holds cheap
/// generation and 1000 MW of load; zone B holds expensive generation and
/// 500 MW of load, more than the 300 MW tie rating, so the tie is always
/// dispatched at its rating. Returns the case and the tie branch index.
pub fn two_zone_case() -> (GridCase<f64>, usize) {
    let mut buses = Vec::with_capacity(52);
    let mut branches = Vec::with_capacity(51);
    for i in 0..52usize {
        let load = match i {
            0 | 26 => 0.0,       // generator buses
            1..=25 => 40.0,      // zone A
            _ => 20.0,           // zone B
        };
        buses.push(Bus {
            id: i + 1,
            load,
            is_reference: i == 0,
        });
    }
    fn next_branch(branches: &mut Vec<Branch<f64>>, from: usize, to: usize, x: f64, rating: f64) {
        branches.push(Branch {
            id: branches.len() + 1,
            from,
            to,
            reactance: x,
            rating,
        });
    }
    for i in 0..25 {
        next_branch(&mut branches, i, i + 1, 0.05, 1e6);
    }
    let tie = branches.len();
    next_branch(&mut branches, 25, 26, 0.10, 300.0);
    for i in 26..51 {
        next_branch(&mut branches, i, i + 1, 0.05, 1e6);
    }
    let generators = vec![
        Generator {
            id: 1,
            bus: 0,
            cost: 10.0,
            p_min: 0.0,
            p_max: 2500.0,
        },
        Generator {
            id: 2,
            bus: 26,
            cost: 100.0,
            p_min: 0.0,
            p_max: 2500.0,
        },
    ];
    (
        GridCase {
            buses,
            branches,
            generators,
            base_mva: 100.0,
        },
        tie,
    )
}

fn hash2(a: usize, b: usize) -> f64 {
    let h = (a.wrapping_mul(7919) ^ b.wrapping_mul(104_729)).wrapping_mul(2_654_435_761) % 1000;
    h as f64 / 1000.0
}

/// Row-major lattice of `n` buses (width 48): each bus links to its left and
/// upper neighbor. Deterministic reactances and loads, generators every 40
/// buses. Used for large-case performance checks.
pub fn lattice_case(n: usize) -> GridCase<f64> {
    assert!(n >= 2);
    let width = 48.min(n - 1).max(1);
    let mut buses = Vec::with_capacity(n);
    let mut branches = Vec::new();
    for i in 0..n {
        buses.push(Bus {
            id: i + 1,
            load: 5.0 + (i % 10) as f64,
            is_reference: i == 0,
        });
        if i % width != 0 {
            branches.push(Branch {
                id: branches.len() + 1,
                from: i - 1,
                to: i,
                reactance: 0.02 + 0.08 * hash2(i, 1),
                rating: 1e5,
            });
        }
        if i >= width {
            branches.push(Branch {
                id: branches.len() + 1,
                from: i - width,
                to: i,
                reactance: 0.02 + 0.08 * hash2(i, 2),
                rating: 1e5,
            });
        }
    }
    let mut generators = Vec::new();
    for i in (0..n).step_by(40) {
        generators.push(Generator {
            id: generators.len() + 1,
            bus: i,
            cost: 20.0 + (i % 5) as f64,
            p_min: 0.0,
            p_max: 1000.0,
        });
    }
    GridCase {
        buses,
        branches,
        generators,
        base_mva: 100.0,
    }
}

/// Seeded random connected case: a random spanning tree plus n/2 extra
/// edges, uniform loads, and enough generation spread over a few buses.
pub fn random_connected_case(n: usize, seed: u64) -> GridCase<f64> {
    assert!(n >= 2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut buses = Vec::with_capacity(n);
    let mut total_load = 0.0;
    for i in 0..n {
        let load = if rng.gen_bool(0.8) {
            (rng.gen::<f64>() * 100.0 * 100.0).round() / 100.0
        } else {
            0.0
        };
        total_load += load;
        buses.push(Bus {
            id: i + 1,
            load,
            is_reference: i == 0,
        });
    }
    let mut branches = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let add_edge = |from: usize, to: usize, rng: &mut ChaCha8Rng,
                        branches: &mut Vec<Branch<f64>>,
                        seen: &mut std::collections::HashSet<(usize, usize)>| {
        let key = (from.min(to), from.max(to));
        if from == to || !seen.insert(key) {
            return;
        }
        branches.push(Branch {
            id: branches.len() + 1,
            from,
            to,
            reactance: 0.05 + 0.45 * rng.gen::<f64>(),
            rating: 1e4,
        });
    };
    for i in 1..n {
        let j = rng.gen_range(0..i);
        add_edge(j, i, &mut rng, &mut branches, &mut seen);
    }
    for _ in 0..n / 2 {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        add_edge(a, b, &mut rng, &mut branches, &mut seen);
    }
    let n_gens = 1 + n / 10;
    let cap = (total_load / n_gens as f64) * 2.0 + 50.0;
    let mut generators = Vec::with_capacity(n_gens);
    for g in 0..n_gens {
        generators.push(Generator {
            id: g + 1,
            bus: rng.gen_range(0..n),
            cost: 10.0 + 90.0 * rng.gen::<f64>(),
            p_min: 0.0,
            p_max: cap,
        });
    }
    GridCase {
        buses,
        branches,
        generators,
        base_mva: 100.0,
    }
}
