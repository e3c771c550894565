//! Detection of structured load-redistribution attacks. For a protected
//! branch, an asset profile fixes the sensitive buses (large |PTDF|), the
//! deviation sign a damaging attack must use at each of them, and a per-bus
//! magnitude threshold derived from the minimum damaging shift factor. The
//! NPDSB index counts sensitive buses whose observed deviation matches both;
//! an attack needs most of them, noise rarely lines up.

use std::fmt::Write as _;

use crate::attack::Direction;
use crate::scalar::Scalar;

/// Default sensitivity cutoff on |PTDF| for profile membership.
pub const CUTOFF_DEFAULT: f64 = 0.05;
/// Flag when more than this fraction of sensitive buses match (strict).
pub const RATIO_THRESHOLD: f64 = 0.5;

#[derive(Debug, thiserror::Error)]
pub enum ProfileError {
    #[error("profile line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unsupported profile version {0:?}")]
    Version(String),
    #[error("deviation vector has {got} entries, profile references bus index {needed}")]
    Dimension { needed: usize, got: usize },
}

/// One sensitive bus of a profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitiveBus<T: Scalar> {
    /// Index into the deviation vector (bus order of the case).
    pub bus: usize,
    /// Deviation sign a damaging attack uses here: +1 or -1.
    pub expected_sign: i8,
    /// Minimum deviation magnitude in MW (strict).
    pub threshold: T,
}

/// Precomputed detection data for one protected branch.
#[derive(Debug, Clone)]
pub struct AssetProfile<T: Scalar> {
    pub target_branch: usize,
    pub direction: Direction,
    pub cutoff: T,
    /// Minimum damaging shift factor; `None` when the branch was found not
    /// attackable (thresholds then fall back to the cap used to build).
    pub alpha_min: Option<T>,
    /// Ordered by |PTDF| descending.
    pub buses: Vec<SensitiveBus<T>>,
}

#[derive(Debug, Clone, Copy)]
pub struct DetectionVerdict<T: Scalar> {
    pub target_branch: usize,
    pub npdsb: usize,
    pub tnsb: usize,
    pub ratio: T,
    pub flagged: bool,
}

impl<T: Scalar> AssetProfile<T> {
    pub fn tnsb(&self) -> usize {
        self.buses.len()
    }
}

/// Build a profile from the target's PTDF row. Sensitive buses are those
/// with |PTDF| above the cutoff and a nonzero load; thresholds are
/// `threshold_alpha * L_i`.
pub fn build_asset_profile<T: Scalar>(
    target_branch: usize,
    ptdf_row: &[T],
    loads: &[T],
    direction: Direction,
    alpha_min: Option<T>,
    cutoff: T,
    alpha_cap: T,
) -> AssetProfile<T> {
    let threshold_alpha = alpha_min.unwrap_or(alpha_cap);
    let sign: T = direction.sign();
    let mut order: Vec<usize> = (0..ptdf_row.len())
        .filter(|&i| ptdf_row[i].abs() > cutoff && loads[i] > T::zero())
        .collect();
    order.sort_by(|&a, &b| ptdf_row[b].abs().partial_cmp(&ptdf_row[a].abs()).unwrap());
    let buses = order
        .into_iter()
        .map(|i| SensitiveBus {
            bus: i,
            expected_sign: if ptdf_row[i] * sign > T::zero() { 1 } else { -1 },
            threshold: threshold_alpha * loads[i],
        })
        .collect();
    AssetProfile {
        target_branch,
        direction,
        cutoff,
        alpha_min,
        buses,
    }
}

/// Number of sensitive buses whose deviation strictly matches the profile in
/// both sign and magnitude.
pub fn npdsb<T: Scalar>(profile: &AssetProfile<T>, deltas: &[T]) -> Result<usize, ProfileError> {
    let mut count = 0;
    for sb in &profile.buses {
        let d = *deltas.get(sb.bus).ok_or(ProfileError::Dimension {
            needed: sb.bus,
            got: deltas.len(),
        })?;
        let sign_ok = if sb.expected_sign > 0 {
            d > T::zero()
        } else {
            d < T::zero()
        };
        if sign_ok && d.abs() > sb.threshold {
            count += 1;
        }
    }
    Ok(count)
}

/// NPDSB / TNSB verdict; flags when the ratio strictly exceeds the
/// threshold. An empty profile never flags.
pub fn classify<T: Scalar>(
    profile: &AssetProfile<T>,
    deltas: &[T],
    ratio_threshold: T,
) -> Result<DetectionVerdict<T>, ProfileError> {
    let tnsb = profile.tnsb();
    let npdsb = npdsb(profile, deltas)?;
    let ratio = if tnsb == 0 {
        T::zero()
    } else {
        T::from_usize(npdsb).unwrap() / T::from_usize(tnsb).unwrap()
    };
    Ok(DetectionVerdict {
        target_branch: profile.target_branch,
        npdsb,
        tnsb,
        ratio,
        flagged: tnsb > 0 && ratio > ratio_threshold,
    })
}

/// Screen estimated loads against a forecast for every profile.
pub fn detect<T: Scalar>(
    estimated: &[T],
    forecast: &[T],
    profiles: &[AssetProfile<T>],
    ratio_threshold: T,
) -> Result<Vec<DetectionVerdict<T>>, ProfileError> {
    let deltas: Vec<T> = estimated
        .iter()
        .zip(forecast)
        .map(|(&e, &f)| e - f)
        .collect();
    profiles
        .iter()
        .map(|p| classify(p, &deltas, ratio_threshold))
        .collect()
}

/// Versioned plain-text cache format, one profile per call.
pub fn serialize_profile<T: Scalar>(p: &AssetProfile<T>) -> String {
    let mut s = String::new();
    writeln!(s, "gridshield-profile v1").unwrap();
    writeln!(s, "target {}", p.target_branch).unwrap();
    writeln!(
        s,
        "direction {}",
        if p.direction == Direction::Positive { "+" } else { "-" }
    )
    .unwrap();
    writeln!(s, "cutoff {}", p.cutoff).unwrap();
    match p.alpha_min {
        Some(a) => writeln!(s, "alpha_min {a}").unwrap(),
        None => writeln!(s, "alpha_min none").unwrap(),
    }
    writeln!(s, "buses {}", p.buses.len()).unwrap();
    for sb in &p.buses {
        writeln!(
            s,
            "{} {} {}",
            sb.bus,
            if sb.expected_sign > 0 { "+" } else { "-" },
            sb.threshold
        )
        .unwrap();
    }
    s
}

pub fn parse_profile<T: Scalar>(text: &str) -> Result<AssetProfile<T>, ProfileError> {
    let err = |line: usize, msg: &str| ProfileError::Parse {
        line,
        msg: msg.to_string(),
    };
    let num = |line: usize, tok: &str| -> Result<T, ProfileError> {
        tok.parse::<f64>()
            .map(T::c)
            .map_err(|_| err(line, "expected a number"))
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (ln, header) = lines.next().ok_or_else(|| err(0, "empty profile"))?;
    let version = header
        .strip_prefix("gridshield-profile ")
        .ok_or_else(|| err(ln, "missing profile header"))?;
    if version != "v1" {
        return Err(ProfileError::Version(version.to_string()));
    }

    let mut target = None;
    let mut direction = None;
    let mut cutoff = None;
    let mut alpha_min: Option<Option<T>> = None;
    let mut n_buses = None;
    for _ in 0..5 {
        let (ln, l) = lines.next().ok_or_else(|| err(0, "truncated profile"))?;
        let (key, val) = l
            .split_once(char::is_whitespace)
            .ok_or_else(|| err(ln, "expected 'key value'"))?;
        match key {
            "target" => {
                target = Some(val.parse().map_err(|_| err(ln, "bad target index"))?)
            }
            "direction" => {
                direction = Some(match val {
                    "+" => Direction::Positive,
                    "-" => Direction::Negative,
                    _ => return Err(err(ln, "direction must be + or -")),
                })
            }
            "cutoff" => cutoff = Some(num(ln, val)?),
            "alpha_min" => {
                alpha_min = Some(if val == "none" { None } else { Some(num(ln, val)?) })
            }
            "buses" => n_buses = Some(val.parse().map_err(|_| err(ln, "bad bus count"))?),
            other => return Err(err(ln, &format!("unknown key {other:?}"))),
        }
    }
    let n_buses: usize = n_buses.ok_or_else(|| err(0, "missing buses count"))?;
    let mut buses = Vec::with_capacity(n_buses);
    for _ in 0..n_buses {
        let (ln, l) = lines.next().ok_or_else(|| err(0, "truncated bus list"))?;
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(err(ln, "expected 'bus sign threshold'"));
        }
        buses.push(SensitiveBus {
            bus: toks[0].parse().map_err(|_| err(ln, "bad bus index"))?,
            expected_sign: match toks[1] {
                "+" => 1,
                "-" => -1,
                _ => return Err(err(ln, "sign must be + or -")),
            },
            threshold: num(ln, toks[2])?,
        });
    }
    Ok(AssetProfile {
        target_branch: target.ok_or_else(|| err(0, "missing target"))?,
        direction: direction.ok_or_else(|| err(0, "missing direction"))?,
        cutoff: cutoff.ok_or_else(|| err(0, "missing cutoff"))?,
        alpha_min: alpha_min.ok_or_else(|| err(0, "missing alpha_min"))?,
        buses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

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
    fn six_bus_profile_membership_and_order() {
        let p = profile6();
        assert_eq!(p.tnsb(), 4);
        let buses: Vec<usize> = p.buses.iter().map(|b| b.bus).collect();
        assert_eq!(buses, vec![2, 5, 4, 1]); // buses 3, 6, 5, 2
        let signs: Vec<i8> = p.buses.iter().map(|b| b.expected_sign).collect();
        assert_eq!(signs, vec![1, 1, -1, 1]);
        let th: Vec<f64> = p.buses.iter().map(|b| b.threshold).collect();
        for (got, want) in th.iter().zip([0.525, 0.35, 0.7, 0.525]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn structured_sample_flags() {
        let p = profile6();
        let v = classify(&p, &fixtures::case6_a1::<f64>(), 0.5).unwrap();
        assert_eq!(v.npdsb, 3);
        assert_eq!(v.tnsb, 4);
        assert!((v.ratio - 0.75).abs() < 1e-12);
        assert!(v.flagged);
    }

    #[test]
    fn unstructured_sample_passes() {
        let p = profile6();
        let v = classify(&p, &fixtures::case6_a2::<f64>(), 0.5).unwrap();
        assert_eq!(v.npdsb, 1);
        assert!(!v.flagged);
    }

    #[test]
    fn ratio_exactly_half_is_not_flagged() {
        let p = profile6();
        // match exactly buses 3 and 6
        let d = vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0];
        let v = classify(&p, &d, 0.5).unwrap();
        assert_eq!(v.npdsb, 2);
        assert!(!v.flagged);
    }

    #[test]
    fn best_attack_matches_every_sensitive_bus() {
        use crate::attack::{greedy_best_attack, AttackSpec, Direction};
        let row = fixtures::case6_ptdf_row::<f64>();
        let loads = fixtures::case6_loads::<f64>();
        let dev = greedy_best_attack(
            &row,
            &loads,
            &AttackSpec {
                target_branch: 0,
                direction: Direction::Positive,
                alpha: 0.10,
            },
        );
        let p = profile6();
        let v = classify(&p, &dev.deltas, 0.5).unwrap();
        assert_eq!(v.npdsb, v.tnsb);
        assert!(v.flagged);
    }

    #[test]
    fn threshold_is_strict() {
        let p = profile6();
        // deviations exactly at the thresholds never count
        let mut d = vec![0.0; 6];
        for sb in &p.buses {
            d[sb.bus] = f64::from(sb.expected_sign) * sb.threshold;
        }
        let v = classify(&p, &d, 0.5).unwrap();
        assert_eq!(v.npdsb, 0);
    }

    #[test]
    fn empty_profile_never_flags() {
        let p: AssetProfile<f64> = AssetProfile {
            target_branch: 0,
            direction: Direction::Positive,
            cutoff: 0.05,
            alpha_min: None,
            buses: vec![],
        };
        let v = classify(&p, &[1.0, 2.0], 0.5).unwrap();
        assert!(!v.flagged);
        assert_eq!(v.ratio, 0.0);
    }

    #[test]
    fn detect_uses_forecast_delta() {
        let p = profile6();
        let forecast = fixtures::case6_loads::<f64>();
        let estimated: Vec<f64> = forecast
            .iter()
            .zip(&fixtures::case6_a1::<f64>())
            .map(|(l, a)| l + a)
            .collect();
        let v = detect(&estimated, &forecast, &[p], 0.5).unwrap();
        assert_eq!(v.len(), 1);
        assert!(v[0].flagged);
    }

    #[test]
    fn profile_roundtrips_through_text() {
        let p = profile6();
        let text = serialize_profile(&p);
        let q: AssetProfile<f64> = parse_profile(&text).unwrap();
        assert_eq!(q.target_branch, p.target_branch);
        assert_eq!(q.direction, p.direction);
        assert_eq!(q.alpha_min, p.alpha_min);
        assert_eq!(q.buses.len(), p.buses.len());
        for (a, b) in q.buses.iter().zip(&p.buses) {
            assert_eq!(a.bus, b.bus);
            assert_eq!(a.expected_sign, b.expected_sign);
            assert!((a.threshold - b.threshold).abs() < 1e-12);
        }
    }

    #[test]
    fn unknown_version_is_rejected() {
        let text = "gridshield-profile v9\n";
        let e = parse_profile::<f64>(text).unwrap_err();
        assert!(matches!(e, ProfileError::Version(_)));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let text = "gridshield-profile v1\ntarget 0\ndirection *\n";
        let e = parse_profile::<f64>(text).unwrap_err();
        match e {
            ProfileError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn short_deviation_vector_is_an_error() {
        let p = profile6();
        assert!(matches!(
            npdsb(&p, &[0.0; 3]),
            Err(ProfileError::Dimension { .. })
        ));
    }
}
