//! Experiment generation: randomized weakened attacks, bounded Gaussian and
//! Cauchy noise, and the end-to-end cyber/physical pipeline that turns a
//! deviation vector into a ScenarioRecord. Everything is seeded and
//! reproducible; batches derive one seed per scenario index.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Cauchy, Distribution, Normal};

use crate::attack::{bounds_from_loads, greedy_with_bounds, DeviationVector};
use crate::dc::flows_from_ptdf;
use crate::detector::{classify, AssetProfile, RATIO_THRESHOLD};
use crate::dispatch::{solve_dcopf, DispatchError};
use crate::{GridCase, PtdfMatrix};

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("zeroed_count {got} exceeds the profile's {tnsb} sensitive buses")]
    TooManyZeroed { got: usize, tnsb: usize },
    #[error("dispatch failed: {0}")]
    Dispatch(#[from] DispatchError),
    #[error("profile error: {0}")]
    Profile(#[from] crate::detector::ProfileError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    Gaussian,
    Cauchy,
}

#[derive(Debug, Clone, Copy)]
pub struct NoiseConfig {
    pub kind: NoiseKind,
    /// Per-bus truncation bound factor: |delta_i| <= alpha * L_i.
    pub alpha: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    Attack,
    GaussianNoise,
    CauchyNoise,
}

impl ScenarioKind {
    pub fn label(self) -> &'static str {
        match self {
            ScenarioKind::Attack => "attack",
            ScenarioKind::GaussianNoise => "gaussian",
            ScenarioKind::CauchyNoise => "cauchy",
        }
    }
}

/// One simulated interval through the full pipeline.
#[derive(Debug, Clone)]
pub struct ScenarioRecord {
    pub index: usize,
    pub kind: ScenarioKind,
    pub deviations: DeviationVector<f64>,
    /// `None` when the DCOPF on falsified loads was infeasible.
    pub cyber_flow: Option<f64>,
    pub physical_flow: Option<f64>,
    /// max(0, |physical_flow| - rating); `None` with an infeasible DCOPF.
    pub overflow: Option<f64>,
    pub npdsb: usize,
    pub tnsb: usize,
    pub ratio: f64,
    pub flagged: bool,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic per-scenario seed for a batch.
pub fn derive_seed(base_seed: u64, index: u64) -> u64 {
    splitmix64(base_seed ^ splitmix64(index))
}

/// Weakened random best attack: the shift factor is drawn uniformly between
/// the profile's minimum damaging factor and the cap (exclusive of the lower
/// end so thresholds are strictly exceeded), and `zeroed_count` sensitive
/// buses picked without replacement are forced to zero deviation.
pub fn random_lr_attack(
    ptdf_row: &[f64],
    loads: &[f64],
    profile: &AssetProfile<f64>,
    alpha_cap: f64,
    zeroed_count: usize,
    rng: &mut impl Rng,
) -> Result<DeviationVector<f64>, ScenarioError> {
    let tnsb = profile.tnsb();
    if zeroed_count > tnsb {
        return Err(ScenarioError::TooManyZeroed {
            got: zeroed_count,
            tnsb,
        });
    }
    let alpha_min = profile.alpha_min.unwrap_or(alpha_cap).min(alpha_cap);
    let u: f64 = rng.gen(); // [0, 1)
    let alpha = alpha_cap - u * (alpha_cap - alpha_min);
    let mut upper = bounds_from_loads(loads, alpha);
    for k in sample(rng, tnsb, zeroed_count) {
        upper[profile.buses[k].bus] = 0.0;
    }
    let sign: f64 = profile.direction.sign();
    let signed: Vec<f64> = ptdf_row.iter().map(|&p| p * sign).collect();
    Ok(DeviationVector {
        deltas: greedy_with_bounds(&signed, &upper),
        alpha: Some(alpha),
    })
}

/// Default fraction of sensitive buses to zero in a weakened attack.
pub fn default_zeroed_count(tnsb: usize) -> usize {
    (0.128 * tnsb as f64).round() as usize
}

fn truncated_sample(
    rng: &mut ChaCha8Rng,
    bound: f64,
    mut draw: impl FnMut(&mut ChaCha8Rng) -> f64,
) -> f64 {
    loop {
        let v = draw(rng);
        if v.abs() <= bound {
            return v;
        }
    }
}

/// Force the sum of deviations over load buses toward zero without leaving
/// the per-bus bounds: repeated mean subtraction with re-clamping, then any
/// residual pushed onto the largest-load buses first.
fn project_zero_sum(deltas: &mut [f64], bounds: &[f64], total_load: f64) {
    let load_buses: Vec<usize> = (0..deltas.len()).filter(|&i| bounds[i] > 0.0).collect();
    if load_buses.is_empty() {
        return;
    }
    let tol = 1e-6 * total_load.max(1.0);
    for _ in 0..10 {
        let sum: f64 = deltas.iter().sum();
        if sum.abs() <= tol {
            return;
        }
        let shift = sum / load_buses.len() as f64;
        for &i in &load_buses {
            deltas[i] = (deltas[i] - shift).clamp(-bounds[i], bounds[i]);
        }
    }
    let mut residual: f64 = deltas.iter().sum();
    if residual.abs() <= tol {
        return;
    }
    let mut by_headroom = load_buses.clone();
    by_headroom.sort_by(|&a, &b| bounds[b].partial_cmp(&bounds[a]).unwrap());
    for &i in &by_headroom {
        let adjusted = (deltas[i] - residual).clamp(-bounds[i], bounds[i]);
        residual -= deltas[i] - adjusted;
        deltas[i] = adjusted;
        if residual.abs() <= tol {
            return;
        }
    }
}

fn bounded_noise(
    loads: &[f64],
    alpha: f64,
    rng: &mut ChaCha8Rng,
    mut draw: impl FnMut(f64, &mut ChaCha8Rng) -> f64,
) -> DeviationVector<f64> {
    let bounds = bounds_from_loads(loads, alpha);
    let mut deltas = vec![0.0; loads.len()];
    for i in 0..loads.len() {
        if bounds[i] > 0.0 {
            let l = loads[i];
            deltas[i] = truncated_sample(rng, bounds[i], |r| draw(l, r));
        }
    }
    project_zero_sum(&mut deltas, &bounds, loads.iter().sum());
    DeviationVector {
        deltas,
        alpha: None,
    }
}

/// Truncated Gaussian noise, sigma = alpha * L_i / 3.1, rejected outside
/// +/- alpha * L_i, zero at zero-load buses, projected to (near) zero sum.
pub fn gaussian_noise(loads: &[f64], config: &NoiseConfig) -> DeviationVector<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let alpha = config.alpha;
    bounded_noise(loads, alpha, &mut rng, |l, r| {
        Normal::new(0.0, alpha * l / 3.1).unwrap().sample(r)
    })
}

/// Truncated Cauchy noise, scale = 0.01 * L_i / 3.1, same constraints.
pub fn cauchy_noise(loads: &[f64], config: &NoiseConfig) -> DeviationVector<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    bounded_noise(loads, config.alpha, &mut rng, |l, r| {
        Cauchy::new(0.0, 0.01 * l / 3.1).unwrap().sample(r)
    })
}

/// Falsify loads, re-dispatch, and replay the dispatch against the true
/// loads; classify the deviations against the profile. An infeasible DCOPF
/// is recorded, not raised.
pub fn run_pipeline(
    case: &GridCase,
    ptdf: &PtdfMatrix,
    target: usize,
    dev: DeviationVector<f64>,
    profile: &AssetProfile<f64>,
) -> Result<ScenarioRecord, ScenarioError> {
    let loads = case.loads();
    let verdict = classify(profile, &dev.deltas, RATIO_THRESHOLD)?;
    let falsified: Vec<f64> = loads
        .iter()
        .zip(&dev.deltas)
        .map(|(&l, &d)| (l + d).max(0.0))
        .collect();
    let (cyber_flow, physical_flow, overflow) = match solve_dcopf(case, ptdf, &falsified) {
        Ok(dispatch) => {
            let mut inj = vec![0.0; case.n_buses()];
            for (j, g) in case.generators.iter().enumerate() {
                inj[g.bus] += dispatch.dispatch[j];
            }
            for i in 0..case.n_buses() {
                inj[i] -= loads[i];
            }
            // generation follows the falsified total, so the tiny residual
            // mismatch lands on the reference bus (zero PTDF column)
            let net: f64 = inj.iter().sum();
            inj[ptdf.reference] -= net;
            let physical = flows_from_ptdf(ptdf, &inj).expect("dimension checked");
            let rating = case.branches[target].rating;
            (
                Some(dispatch.cyber_flows[target]),
                Some(physical[target]),
                Some((physical[target].abs() - rating).max(0.0)),
            )
        }
        Err(DispatchError::Infeasible) => (None, None, None),
        Err(e) => return Err(e.into()),
    };
    Ok(ScenarioRecord {
        index: 0,
        kind: ScenarioKind::Attack,
        deviations: dev,
        cyber_flow,
        physical_flow,
        overflow,
        npdsb: verdict.npdsb,
        tnsb: verdict.tnsb,
        ratio: verdict.ratio,
        flagged: verdict.flagged,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct BatchConfig {
    pub n_attacks: usize,
    pub n_noise: usize,
    pub noise_kind: NoiseKind,
    /// Bound factor for the noise vectors.
    pub noise_alpha: f64,
    pub alpha_cap: f64,
    pub zeroed_count: usize,
    pub base_seed: u64,
}

/// Run a full batch: attacks first, then noise, indices in order, one
/// derived seed per index. Deterministic for a fixed config.
pub fn monte_carlo(
    case: &GridCase,
    ptdf: &PtdfMatrix,
    profile: &AssetProfile<f64>,
    config: &BatchConfig,
) -> Result<Vec<ScenarioRecord>, ScenarioError> {
    let target = profile.target_branch;
    let row = ptdf.row(target).to_vec();
    let loads = case.loads();
    let mut records = Vec::with_capacity(config.n_attacks + config.n_noise);
    for i in 0..config.n_attacks {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.base_seed, i as u64));
        let dev = random_lr_attack(
            &row,
            &loads,
            profile,
            config.alpha_cap,
            config.zeroed_count,
            &mut rng,
        )?;
        let mut rec = run_pipeline(case, ptdf, target, dev, profile)?;
        rec.index = i;
        rec.kind = ScenarioKind::Attack;
        records.push(rec);
    }
    for j in 0..config.n_noise {
        let i = config.n_attacks + j;
        let noise_cfg = NoiseConfig {
            kind: config.noise_kind,
            alpha: config.noise_alpha,
            seed: derive_seed(config.base_seed, i as u64),
        };
        let dev = match config.noise_kind {
            NoiseKind::Gaussian => gaussian_noise(&loads, &noise_cfg),
            NoiseKind::Cauchy => cauchy_noise(&loads, &noise_cfg),
        };
        let mut rec = run_pipeline(case, ptdf, target, dev, profile)?;
        rec.index = i;
        rec.kind = match config.noise_kind {
            NoiseKind::Gaussian => ScenarioKind::GaussianNoise,
            NoiseKind::Cauchy => ScenarioKind::CauchyNoise,
        };
        records.push(rec);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attack::{greedy_best_attack, AttackSpec, Direction};
    use crate::dc::{compute_ptdf, SusceptanceSystem};
    use crate::detector::build_asset_profile;
    use crate::fixtures;

    fn three_bus() -> (GridCase, PtdfMatrix, AssetProfile<f64>) {
        let case = fixtures::case3::<f64>();
        let sys = SusceptanceSystem::build(&case).unwrap();
        let ptdf = compute_ptdf(&sys, case.reference()).unwrap();
        // alpha_min below the smallest alpha exercised so its attacks
        // strictly clear the thresholds
        let profile = build_asset_profile(
            0,
            ptdf.row(0),
            &case.loads(),
            Direction::Positive,
            Some(0.04),
            0.05,
            0.10,
        );
        (case, ptdf, profile)
    }

    fn best_attack3(ptdf: &PtdfMatrix, loads: &[f64], alpha: f64) -> DeviationVector<f64> {
        greedy_best_attack(
            ptdf.row(0),
            loads,
            &AttackSpec {
                target_branch: 0,
                direction: Direction::Positive,
                alpha,
            },
        )
    }

    #[test]
    fn three_bus_pipeline_alpha5_overflows_four_mw() {
        let (case, ptdf, profile) = three_bus();
        let dev = best_attack3(&ptdf, &case.loads(), 0.05);
        let rec = run_pipeline(&case, &ptdf, 0, dev, &profile).unwrap();
        assert!((rec.cyber_flow.unwrap() - 30.0).abs() < 1e-7);
        assert!((rec.physical_flow.unwrap() - 34.0).abs() < 1e-7);
        assert!((rec.overflow.unwrap() - 4.0).abs() < 1e-7);
        assert!(rec.flagged);
    }

    #[test]
    fn three_bus_pipeline_alpha10_overflows_eight_mw() {
        let (case, ptdf, profile) = three_bus();
        let dev = best_attack3(&ptdf, &case.loads(), 0.10);
        let rec = run_pipeline(&case, &ptdf, 0, dev, &profile).unwrap();
        assert!((rec.physical_flow.unwrap() - 38.0).abs() < 1e-7);
        // 8 MW over the 30 MW rating: the 26.6% overflow case
        assert!((rec.overflow.unwrap() - 8.0).abs() < 1e-7);
    }

    #[test]
    fn zero_deviations_keep_cyber_equal_physical() {
        let (case, ptdf, profile) = three_bus();
        let dev = DeviationVector {
            deltas: vec![0.0; 3],
            alpha: None,
        };
        let rec = run_pipeline(&case, &ptdf, 0, dev, &profile).unwrap();
        assert!((rec.cyber_flow.unwrap() - rec.physical_flow.unwrap()).abs() < 1e-9);
        assert_eq!(rec.npdsb, 0);
        assert!(!rec.flagged);
        assert_eq!(rec.overflow.unwrap(), 0.0);
    }

    fn profile6() -> AssetProfile<f64> {
        build_asset_profile(
            0,
            &fixtures::case6_ptdf_row::<f64>(),
            &fixtures::case6_loads::<f64>(),
            Direction::Positive,
            Some(0.035),
            0.05,
            0.10,
        )
    }

    #[test]
    fn random_attack_is_seed_deterministic() {
        let row = fixtures::case6_ptdf_row::<f64>();
        let loads = fixtures::case6_loads::<f64>();
        let p = profile6();
        let run = |seed: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            random_lr_attack(&row, &loads, &p, 0.10, 1, &mut rng).unwrap()
        };
        let (a, b) = (run(7), run(7));
        assert_eq!(a.deltas, b.deltas);
        assert_eq!(a.alpha, b.alpha);
        assert_ne!(run(8).deltas, a.deltas);
    }

    #[test]
    fn degenerate_randomization_matches_best_attack() {
        let row = fixtures::case6_ptdf_row::<f64>();
        let loads = fixtures::case6_loads::<f64>();
        // alpha_min pinned at the cap: the draw is always the cap
        let mut p = profile6();
        p.alpha_min = Some(0.10);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let dev = random_lr_attack(&row, &loads, &p, 0.10, 0, &mut rng).unwrap();
        let best = greedy_best_attack(
            &row,
            &loads,
            &AttackSpec {
                target_branch: 0,
                direction: Direction::Positive,
                alpha: 0.10,
            },
        );
        assert_eq!(dev.deltas, best.deltas);
    }

    #[test]
    fn fully_zeroed_attack_has_npdsb_zero() {
        let row = fixtures::case6_ptdf_row::<f64>();
        let loads = fixtures::case6_loads::<f64>();
        let p = profile6();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let dev = random_lr_attack(&row, &loads, &p, 0.10, p.tnsb(), &mut rng).unwrap();
        for sb in &p.buses {
            assert_eq!(dev.deltas[sb.bus], 0.0);
        }
        let v = classify(&p, &dev.deltas, 0.5).unwrap();
        assert_eq!(v.npdsb, 0);
    }

    #[test]
    fn too_many_zeroed_is_an_error() {
        let row = fixtures::case6_ptdf_row::<f64>();
        let loads = fixtures::case6_loads::<f64>();
        let p = profile6();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(matches!(
            random_lr_attack(&row, &loads, &p, 0.10, p.tnsb() + 1, &mut rng),
            Err(ScenarioError::TooManyZeroed { .. })
        ));
    }

    #[test]
    fn attack_alpha_stays_in_the_open_interval() {
        let row = fixtures::case6_ptdf_row::<f64>();
        let loads = fixtures::case6_loads::<f64>();
        let p = profile6();
        for seed in 0..200 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let dev = random_lr_attack(&row, &loads, &p, 0.10, 0, &mut rng).unwrap();
            let a = dev.alpha.unwrap();
            assert!(a > 0.035 && a <= 0.10, "alpha {a} out of range");
        }
    }

    #[test]
    fn gaussian_noise_respects_bounds_and_balance() {
        let loads = vec![10.0, 15.0, 15.0, 30.0, 20.0, 0.0];
        for seed in 0..50 {
            let cfg = NoiseConfig {
                kind: NoiseKind::Gaussian,
                alpha: 0.10,
                seed,
            };
            let dev = gaussian_noise(&loads, &cfg);
            for (i, &d) in dev.deltas.iter().enumerate() {
                assert!(d.abs() <= 0.10 * loads[i] + 1e-12, "bus {i}: {d}");
            }
            assert_eq!(dev.deltas[5], 0.0);
            let total: f64 = loads.iter().sum();
            let sum: f64 = dev.deltas.iter().sum();
            assert!(sum.abs() <= 1e-6 * total, "imbalance {sum}");
        }
    }

    #[test]
    fn cauchy_noise_respects_bounds_despite_heavy_tails() {
        let loads = vec![10.0, 15.0, 15.0, 30.0, 20.0, 0.0];
        for seed in 0..50 {
            let cfg = NoiseConfig {
                kind: NoiseKind::Cauchy,
                alpha: 0.10,
                seed,
            };
            let dev = cauchy_noise(&loads, &cfg);
            for (i, &d) in dev.deltas.iter().enumerate() {
                assert!(d.abs() <= 0.10 * loads[i] + 1e-12);
            }
            let total: f64 = loads.iter().sum();
            let sum: f64 = dev.deltas.iter().sum();
            assert!(sum.abs() <= 1e-6 * total);
        }
    }

    #[test]
    fn noise_is_seed_deterministic() {
        let loads = vec![10.0, 15.0, 15.0, 30.0, 20.0, 10.0];
        let cfg = NoiseConfig {
            kind: NoiseKind::Gaussian,
            alpha: 0.10,
            seed: 11,
        };
        assert_eq!(gaussian_noise(&loads, &cfg).deltas, gaussian_noise(&loads, &cfg).deltas);
        let cfg2 = NoiseConfig {
            kind: NoiseKind::Cauchy,
            ..cfg
        };
        assert_eq!(cauchy_noise(&loads, &cfg2).deltas, cauchy_noise(&loads, &cfg2).deltas);
    }

    #[test]
    fn empty_batch_yields_no_records() {
        let (case, ptdf, profile) = three_bus();
        let cfg = BatchConfig {
            n_attacks: 0,
            n_noise: 0,
            noise_kind: NoiseKind::Gaussian,
            noise_alpha: 0.10,
            alpha_cap: 0.10,
            zeroed_count: 0,
            base_seed: 1,
        };
        assert!(monte_carlo(&case, &ptdf, &profile, &cfg).unwrap().is_empty());
    }

    #[test]
    fn batches_are_bit_identical_for_a_seed() {
        let (case, ptdf, profile) = three_bus();
        let cfg = BatchConfig {
            n_attacks: 5,
            n_noise: 5,
            noise_kind: NoiseKind::Gaussian,
            noise_alpha: 0.10,
            alpha_cap: 0.10,
            zeroed_count: 0,
            base_seed: 42,
        };
        let a = monte_carlo(&case, &ptdf, &profile, &cfg).unwrap();
        let b = monte_carlo(&case, &ptdf, &profile, &cfg).unwrap();
        assert_eq!(a.len(), 10);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.deviations.deltas, y.deviations.deltas);
            assert_eq!(x.cyber_flow, y.cyber_flow);
            assert_eq!(x.physical_flow, y.physical_flow);
            assert_eq!(x.flagged, y.flagged);
            assert_eq!(x.kind, y.kind);
        }
    }

    #[test]
    fn derived_seeds_differ_across_indices() {
        let s: Vec<u64> = (0..100).map(|i| derive_seed(9, i)).collect();
        let mut dedup = s.clone();
        dedup.sort_unstable();
        dedup.dedup();
        assert_eq!(dedup.len(), s.len());
    }
}
