//! Coincidence-counting simulation and the estimators that turn raw counts
//! into expectation values with propagated Poisson errors.
//!
//! The detection model is fair sampling: the detected-pair rate already
//! bundles all efficiencies, and each scheduled polarizer pair is an
//! independent Poisson draw (the settings are acquired sequentially, so the
//! four totals making up one correlation term fluctuate independently).

use std::collections::{HashMap, HashSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inequality::{InequalityTable, SettingsVector};
use crate::qstate::{joint, marginal_alice, marginal_bob, Angle, XZState};

/// Slightly negative scheduled probabilities (estimation noise in the input
/// state) are floored to a zero rate up to this magnitude; anything more
/// negative is treated as a genuinely unphysical request.
pub const NEGATIVE_RATE_TOL: f64 = 0.01;

/// Detected-pair source parameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SourceConfig {
    /// Detected coincidences per second with both polarizers removed.
    pub pair_rate: f64,
    /// Integration time per polarizer pair, seconds.
    pub duration: f64,
    pub seed: u64,
}

impl SourceConfig {
    pub fn new(pair_rate: f64, duration: f64, seed: u64) -> Result<Self> {
        if !(pair_rate > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "pair rate must be positive, got {pair_rate}"
            )));
        }
        if !(duration > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "duration must be positive, got {duration}"
            )));
        }
        Ok(SourceConfig {
            pair_rate,
            duration,
            seed,
        })
    }
}

/// One scheduled orientation of the two polarizers, degrees from vertical.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarizerPair {
    pub alice_deg: f64,
    pub bob_deg: f64,
}

/// One acquisition: a polarizer pair, its integration time and the number of
/// coincidences observed.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CountRecord {
    #[serde(rename = "alice_deg")]
    pub alice_polarizer_deg: f64,
    #[serde(rename = "bob_deg")]
    pub bob_polarizer_deg: f64,
    #[serde(rename = "duration_s")]
    pub duration: f64,
    pub counts: u64,
}

/// A value with its one-standard-deviation Poisson error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub sigma: f64,
    /// Set when first-order propagation degenerates to sigma = 0 on nonzero
    /// data (e.g. perfect anticorrelation); no floor is imposed.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub degenerate: bool,
}

impl Estimate {
    pub fn new(value: f64, sigma: f64) -> Self {
        Estimate {
            value,
            sigma,
            degenerate: false,
        }
    }
}

/// A polarizer at `theta` degrees projects onto the Bloch angle `2 theta`.
pub fn bloch_from_polarizer(deg: f64) -> Angle {
    Angle::from_degrees(2.0 * deg)
}

pub fn polarizer_from_bloch(angle: Angle) -> f64 {
    angle.degrees() / 2.0
}

fn joint_plus_plus_probability(state: &XZState, pair: PolarizerPair) -> f64 {
    let alpha = bloch_from_polarizer(pair.alice_deg);
    let beta = bloch_from_polarizer(pair.bob_deg);
    0.25 * (1.0
        + marginal_alice(state, alpha)
        + marginal_bob(state, beta)
        + joint(state, alpha, beta))
}

/// Simulate the scheduled acquisitions. Counts for each polarizer pair are
/// Poisson with mean `pair_rate * duration * p(+,+)`; deterministic for a
/// fixed seed.
pub fn simulate_counts(
    state: &XZState,
    config: &SourceConfig,
    schedule: &[PolarizerPair],
) -> Result<Vec<CountRecord>> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut records = Vec::with_capacity(schedule.len());
    for &pair in schedule {
        let p = joint_plus_plus_probability(state, pair);
        if p < -NEGATIVE_RATE_TOL {
            return Err(Error::UnphysicalState {
                probability: p,
                alpha: bloch_from_polarizer(pair.alice_deg).radians(),
                beta: bloch_from_polarizer(pair.bob_deg).radians(),
            });
        }
        let mean = config.pair_rate * config.duration * p.max(0.0);
        let counts = if mean > 0.0 {
            let draw: f64 = Poisson::new(mean)
                .map_err(|e| Error::InvalidArgument(format!("poisson rate: {e}")))?
                .sample(&mut rng);
            draw.round() as u64
        } else {
            0
        };
        records.push(CountRecord {
            alice_polarizer_deg: pair.alice_deg,
            bob_polarizer_deg: pair.bob_deg,
            duration: config.duration,
            counts,
        });
    }
    Ok(records)
}

fn counts_estimate(counts: [u64; 4], signs: [f64; 4]) -> Result<Estimate> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::InvalidArgument(
            "cannot estimate from zero total counts".into(),
        ));
    }
    let t = total as f64;
    let value = counts
        .iter()
        .zip(signs)
        .map(|(&n, s)| s * n as f64)
        .sum::<f64>()
        / t;
    // each count is an independent Poisson variable with variance equal to
    // its observed value
    let variance: f64 = counts
        .iter()
        .zip(signs)
        .map(|(&n, s)| {
            let d = (s - value) / t;
            d * d * n as f64
        })
        .sum();
    let sigma = variance.sqrt();
    Ok(Estimate {
        value,
        sigma,
        degenerate: sigma == 0.0,
    })
}

/// Correlation `E(A B)` from the four orientation totals. Argument order is
/// `(+,+), (+,-), (-,+), (-,-)`, where `-` means the polarizer rotated by 90
/// degrees.
pub fn correlation_from_counts(n_pp: u64, n_pm: u64, n_mp: u64, n_mm: u64) -> Result<Estimate> {
    counts_estimate([n_pp, n_pm, n_mp, n_mm], [1.0, -1.0, -1.0, 1.0])
}

/// Alice's single-party expectation from one orientation quadruple.
pub fn alice_marginal_from_counts(
    n_pp: u64,
    n_pm: u64,
    n_mp: u64,
    n_mm: u64,
) -> Result<Estimate> {
    counts_estimate([n_pp, n_pm, n_mp, n_mm], [1.0, 1.0, -1.0, -1.0])
}

/// Bob's single-party expectation from one orientation quadruple.
pub fn bob_marginal_from_counts(n_pp: u64, n_pm: u64, n_mp: u64, n_mm: u64) -> Result<Estimate> {
    counts_estimate([n_pp, n_pm, n_mp, n_mm], [1.0, -1.0, 1.0, -1.0])
}

/// Combine the two independent measurements of the same marginal (taken
/// against the partner's two bases). The error is the larger of the
/// propagated Poisson error of the mean and half the spread between the two,
/// so basis-dependent systematics inflate the reported sigma.
pub fn marginal_from_counts(estimates: &[Estimate]) -> Result<Estimate> {
    let [a, b] = estimates else {
        return Err(Error::InvalidArgument(format!(
            "marginal combination expects exactly two estimates, got {}",
            estimates.len()
        )));
    };
    let value = 0.5 * (a.value + b.value);
    let propagated = 0.5 * (a.sigma * a.sigma + b.sigma * b.sigma).sqrt();
    let spread = 0.5 * (a.value - b.value).abs();
    Ok(Estimate {
        value,
        sigma: propagated.max(spread),
        degenerate: a.degenerate && b.degenerate,
    })
}

fn angle_key(deg: f64) -> i64 {
    (deg.rem_euclid(360.0) * 1e6).round() as i64 % 360_000_000
}

fn pair_key(pair: PolarizerPair) -> (i64, i64) {
    (angle_key(pair.alice_deg), angle_key(pair.bob_deg))
}

/// The four acquisitions of one correlation term, in estimator argument
/// order: `(+,+), (+,-), (-,+), (-,-)`, where `-` rotates the polarizer by
/// 90 degrees.
pub fn orientation_quadruple(alice_deg: f64, bob_deg: f64) -> [PolarizerPair; 4] {
    let quad = |a, b| PolarizerPair {
        alice_deg: a,
        bob_deg: b,
    };
    [
        quad(alice_deg, bob_deg),
        quad(alice_deg, bob_deg + 90.0),
        quad(alice_deg + 90.0, bob_deg),
        quad(alice_deg + 90.0, bob_deg + 90.0),
    ]
}

fn push_unique(
    schedule: &mut Vec<PolarizerPair>,
    seen: &mut HashSet<(i64, i64)>,
    pairs: [PolarizerPair; 4],
) {
    for pair in pairs {
        if seen.insert(pair_key(pair)) {
            schedule.push(pair);
        }
    }
}

/// Every polarizer pair needed to evaluate `table` at `settings`: four
/// orientations per nonzero correlation term, and (for tables with marginal
/// terms) the marginal of each setting measured against the partner's first
/// two settings. Duplicates are merged.
pub fn measurement_schedule(
    table: &InequalityTable,
    settings: &SettingsVector,
) -> Result<Vec<PolarizerPair>> {
    let n = table.n();
    if settings.alice.len() != n || settings.bob.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "table {} has {} settings per side, got {} / {}",
            table.name(),
            n,
            settings.alice.len(),
            settings.bob.len()
        )));
    }
    let a_deg: Vec<f64> = settings.alice.iter().map(|&a| polarizer_from_bloch(a)).collect();
    let b_deg: Vec<f64> = settings.bob.iter().map(|&b| polarizer_from_bloch(b)).collect();

    let mut schedule = Vec::new();
    let mut seen = HashSet::new();
    for i in 0..n {
        for j in 0..n {
            if table.joint_coeffs()[i][j] != 0.0 {
                push_unique(&mut schedule, &mut seen, orientation_quadruple(a_deg[i], b_deg[j]));
            }
        }
    }
    for i in 0..n {
        if table.alice_marginals()[i] != 0.0 {
            for j in 0..2 {
                push_unique(&mut schedule, &mut seen, orientation_quadruple(a_deg[i], b_deg[j]));
            }
        }
    }
    for j in 0..n {
        if table.bob_marginals()[j] != 0.0 {
            for i in 0..2 {
                push_unique(&mut schedule, &mut seen, orientation_quadruple(a_deg[i], b_deg[j]));
            }
        }
    }
    Ok(schedule)
}

pub(crate) struct CountSet {
    counts: HashMap<(i64, i64), u64>,
}

impl CountSet {
    pub(crate) fn new(records: &[CountRecord]) -> Self {
        let mut counts = HashMap::new();
        for r in records {
            let pair = PolarizerPair {
                alice_deg: r.alice_polarizer_deg,
                bob_deg: r.bob_polarizer_deg,
            };
            *counts.entry(pair_key(pair)).or_insert(0) += r.counts;
        }
        CountSet { counts }
    }

    pub(crate) fn quadruple(
        &self,
        alice_deg: f64,
        bob_deg: f64,
        missing: &mut Vec<String>,
    ) -> Option<[u64; 4]> {
        let mut out = [0u64; 4];
        let mut complete = true;
        for (slot, pair) in out.iter_mut().zip(orientation_quadruple(alice_deg, bob_deg)) {
            match self.counts.get(&pair_key(pair)) {
                Some(&n) => *slot = n,
                None => {
                    missing.push(format!(
                        "alice {:.3}°, bob {:.3}°",
                        pair.alice_deg.rem_euclid(360.0),
                        pair.bob_deg.rem_euclid(360.0)
                    ));
                    complete = false;
                }
            }
        }
        complete.then_some(out)
    }
}

/// Contract the table against count-derived estimates: correlation terms from
/// their orientation quadruples, marginal terms from the two partner-basis
/// measurements, errors combined in quadrature.
pub fn bell_value_from_counts(
    table: &InequalityTable,
    settings: &SettingsVector,
    records: &[CountRecord],
) -> Result<Estimate> {
    let n = table.n();
    if settings.alice.len() != n || settings.bob.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "table {} has {} settings per side, got {} / {}",
            table.name(),
            n,
            settings.alice.len(),
            settings.bob.len()
        )));
    }
    let a_deg: Vec<f64> = settings.alice.iter().map(|&a| polarizer_from_bloch(a)).collect();
    let b_deg: Vec<f64> = settings.bob.iter().map(|&b| polarizer_from_bloch(b)).collect();
    let set = CountSet::new(records);

    let mut missing = Vec::new();
    let mut value = 0.0;
    let mut variance = 0.0;
    let mut accumulate = |coeff: f64, est: Result<Estimate>| -> Result<()> {
        let est = est?;
        value += coeff * est.value;
        variance += coeff * coeff * est.sigma * est.sigma;
        Ok(())
    };

    for i in 0..n {
        for j in 0..n {
            let l = table.joint_coeffs()[i][j];
            if l == 0.0 {
                continue;
            }
            if let Some([pp, pm, mp, mm]) = set.quadruple(a_deg[i], b_deg[j], &mut missing) {
                accumulate(l, correlation_from_counts(pp, pm, mp, mm))?;
            }
        }
    }
    for i in 0..n {
        let c = table.alice_marginals()[i];
        if c == 0.0 {
            continue;
        }
        let mut pair_estimates = Vec::with_capacity(2);
        for j in 0..2 {
            if let Some([pp, pm, mp, mm]) = set.quadruple(a_deg[i], b_deg[j], &mut missing) {
                pair_estimates.push(alice_marginal_from_counts(pp, pm, mp, mm)?);
            }
        }
        if pair_estimates.len() == 2 {
            accumulate(c, marginal_from_counts(&pair_estimates))?;
        }
    }
    for j in 0..n {
        let c = table.bob_marginals()[j];
        if c == 0.0 {
            continue;
        }
        let mut pair_estimates = Vec::with_capacity(2);
        for i in 0..2 {
            if let Some([pp, pm, mp, mm]) = set.quadruple(a_deg[i], b_deg[j], &mut missing) {
                pair_estimates.push(bob_marginal_from_counts(pp, pm, mp, mm)?);
            }
        }
        if pair_estimates.len() == 2 {
            accumulate(c, marginal_from_counts(&pair_estimates))?;
        }
    }

    if !missing.is_empty() {
        missing.sort();
        missing.dedup();
        return Err(Error::IncompleteCounts { missing });
    }
    Ok(Estimate::new(value, variance.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inequality::{
        catalog_chained, catalog_chsh, catalog_i3322, evaluate, InequalityTable,
    };
    use crate::optimizer::optimize_settings;
    use crate::qstate::{measured_state, werner_state, WernerParams};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn config(seed: u64) -> SourceConfig {
        SourceConfig::new(4200.0, 20.0, seed).unwrap()
    }

    #[test]
    fn singlet_parallel_polarizers_never_coincide() {
        let schedule = [PolarizerPair {
            alice_deg: 0.0,
            bob_deg: 0.0,
        }];
        let records = simulate_counts(&XZState::singlet(), &config(7), &schedule).unwrap();
        assert_eq!(records[0].counts, 0);
    }

    #[test]
    fn maximally_mixed_rate_quarter() {
        let schedule = [PolarizerPair {
            alice_deg: 33.0,
            bob_deg: 71.0,
        }];
        let records =
            simulate_counts(&XZState::maximally_mixed(), &config(11), &schedule).unwrap();
        // mean 4200 * 20 / 4 = 21000, sigma ~ 145
        let n = records[0].counts as f64;
        assert!((n - 21000.0).abs() < 5.0 * 145.0, "counts {n}");
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        let schedule: Vec<PolarizerPair> = (0..10)
            .map(|k| PolarizerPair {
                alice_deg: 7.0 * k as f64,
                bob_deg: 13.0 * k as f64,
            })
            .collect();
        let s = measured_state();
        let a = simulate_counts(&s, &config(42), &schedule).unwrap();
        let b = simulate_counts(&s, &config(42), &schedule).unwrap();
        assert_eq!(
            a.iter().map(|r| r.counts).collect::<Vec<_>>(),
            b.iter().map(|r| r.counts).collect::<Vec<_>>()
        );
    }

    #[test]
    fn slightly_negative_probability_floors_to_zero() {
        // p(+,+) at (0, 0) is (1 + b_z + c_zz) / 4 = -0.005
        let s = XZState::new(0.0, 0.0, -0.02, 0.0, -1.0, 0.0, 0.0, -1.0).unwrap();
        let schedule = [PolarizerPair {
            alice_deg: 0.0,
            bob_deg: 0.0,
        }];
        let records = simulate_counts(&s, &config(3), &schedule).unwrap();
        assert_eq!(records[0].counts, 0);
    }

    #[test]
    fn strongly_negative_probability_rejected() {
        let s = XZState::new(0.0, 0.0, -0.06, 0.0, -1.0, 0.0, 0.0, -1.0).unwrap();
        let schedule = [PolarizerPair {
            alice_deg: 0.0,
            bob_deg: 0.0,
        }];
        assert!(matches!(
            simulate_counts(&s, &config(3), &schedule),
            Err(Error::UnphysicalState { .. })
        ));
    }

    #[test]
    fn correlation_balanced_counts() {
        let e = correlation_from_counts(100, 100, 100, 100).unwrap();
        assert_abs_diff_eq!(e.value, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e.sigma, 0.05, epsilon = 1e-15);
        assert!(!e.degenerate);
    }

    #[test]
    fn correlation_perfect_anticorrelation_is_degenerate() {
        let e = correlation_from_counts(0, 250, 250, 0).unwrap();
        assert_eq!(e.value, -1.0);
        assert_eq!(e.sigma, 0.0);
        assert!(e.degenerate);
    }

    #[test]
    fn correlation_zero_total_rejected() {
        assert!(correlation_from_counts(0, 0, 0, 0).is_err());
    }

    #[test]
    fn simulated_zz_correlation_matches_state() {
        let s = measured_state();
        let schedule = orientation_quadruple(0.0, 0.0);
        let records = simulate_counts(&s, &config(19), &schedule).unwrap();
        let e = correlation_from_counts(
            records[0].counts,
            records[1].counts,
            records[2].counts,
            records[3].counts,
        )
        .unwrap();
        assert!(e.sigma < 0.002, "sigma {}", e.sigma);
        assert!((e.value - s.c_zz).abs() < 3.0 * e.sigma.max(1e-3));
    }

    #[test]
    fn marginal_combination_rule() {
        let a = Estimate::new(0.060, 0.010);
        let b = Estimate::new(0.070, 0.010);
        let m = marginal_from_counts(&[a, b]).unwrap();
        assert_abs_diff_eq!(m.value, 0.065, epsilon = 1e-15);
        assert_abs_diff_eq!(m.sigma, 0.010 / 2.0_f64.sqrt(), epsilon = 1e-12);

        // a large spread dominates the propagated term
        let c = Estimate::new(0.2, 0.010);
        let m = marginal_from_counts(&[a, c]).unwrap();
        assert_abs_diff_eq!(m.sigma, 0.07, epsilon = 1e-12);

        assert!(marginal_from_counts(&[a]).is_err());
        assert!(marginal_from_counts(&[a, b, c]).is_err());
    }

    #[test]
    fn marginal_identical_estimates() {
        let a = Estimate::new(0.065, 0.02);
        let m = marginal_from_counts(&[a, a]).unwrap();
        assert_abs_diff_eq!(m.value, 0.065, epsilon = 1e-15);
        assert_abs_diff_eq!(m.sigma, 0.02 / 2.0_f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn schedule_covers_chsh_without_duplicates() {
        let settings = SettingsVector::new(
            vec![Angle::from_radians(0.0), Angle::from_radians(PI / 2.0)],
            vec![
                Angle::from_radians(PI - PI / 4.0),
                Angle::from_radians(PI + PI / 4.0),
            ],
        );
        let schedule = measurement_schedule(&catalog_chsh(), &settings).unwrap();
        assert_eq!(schedule.len(), 16);
        let keys: HashSet<_> = schedule.iter().map(|&p| pair_key(p)).collect();
        assert_eq!(keys.len(), 16);
    }

    #[test]
    fn schedule_includes_marginal_partner_bases() {
        // i3322 has marginal terms; its schedule must cover (a_i, b_0) and
        // (a_i, b_1) even where the joint coefficient vanishes
        let t = catalog_i3322();
        let settings = SettingsVector::new(
            vec![0.3, 1.1, 2.0].into_iter().map(Angle::from_radians).collect(),
            vec![3.4, 4.2, 5.0].into_iter().map(Angle::from_radians).collect(),
        );
        let schedule = measurement_schedule(&t, &settings).unwrap();
        let keys: HashSet<_> = schedule.iter().map(|&p| pair_key(p)).collect();
        for quad in orientation_quadruple(
            polarizer_from_bloch(settings.alice[2]),
            polarizer_from_bloch(settings.bob[1]),
        ) {
            assert!(keys.contains(&pair_key(quad)));
        }
    }

    #[test]
    fn bell_value_algebraic_maximum() {
        // hand-built counts saturating each term's sign pattern on CHSH
        let settings = SettingsVector::new(
            vec![Angle::from_degrees(0.0), Angle::from_degrees(60.0)],
            vec![Angle::from_degrees(20.0), Angle::from_degrees(80.0)],
        );
        let mut records = Vec::new();
        let mut push = |quad: [PolarizerPair; 4], pattern: [u64; 4]| {
            for (pair, counts) in quad.into_iter().zip(pattern) {
                records.push(CountRecord {
                    alice_polarizer_deg: pair.alice_deg,
                    bob_polarizer_deg: pair.bob_deg,
                    duration: 20.0,
                    counts,
                });
            }
        };
        let a: Vec<f64> = settings.alice.iter().map(|&x| polarizer_from_bloch(x)).collect();
        let b: Vec<f64> = settings.bob.iter().map(|&x| polarizer_from_bloch(x)).collect();
        let correlated = [500, 0, 0, 500];
        let anticorrelated = [0, 500, 500, 0];
        // coefficients are +1, +1, -1, +1, so E = +1, +1, -1, +1 reaches 4
        push(orientation_quadruple(a[0], b[0]), correlated);
        push(orientation_quadruple(a[0], b[1]), correlated);
        push(orientation_quadruple(a[1], b[0]), anticorrelated);
        push(orientation_quadruple(a[1], b[1]), correlated);
        let e = bell_value_from_counts(&catalog_chsh(), &settings, &records).unwrap();
        assert_abs_diff_eq!(e.value, 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e.sigma, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn bell_value_missing_terms_are_named() {
        let settings = SettingsVector::new(
            vec![Angle::from_degrees(0.0), Angle::from_degrees(60.0)],
            vec![Angle::from_degrees(20.0), Angle::from_degrees(80.0)],
        );
        let schedule = measurement_schedule(&catalog_chsh(), &settings).unwrap();
        let s = measured_state();
        let mut records = simulate_counts(&s, &config(5), &schedule).unwrap();
        records.truncate(records.len() - 3);
        match bell_value_from_counts(&catalog_chsh(), &settings, &records) {
            Err(Error::IncompleteCounts { missing }) => assert_eq!(missing.len(), 3),
            other => panic!("expected incomplete counts, got {other:?}"),
        }
    }

    #[test]
    fn simulated_chsh_run_matches_optimum() {
        let s = measured_state();
        let t = catalog_chsh();
        let opt = optimize_settings(&t, &s, 8, 1).unwrap();
        let schedule = measurement_schedule(&t, &opt.settings).unwrap();
        let records = simulate_counts(&s, &config(23), &schedule).unwrap();
        let e = bell_value_from_counts(&t, &opt.settings, &records).unwrap();
        assert!(e.sigma > 0.001 && e.sigma < 0.03, "sigma {}", e.sigma);
        assert!(
            (e.value - opt.value).abs() < 4.0 * e.sigma,
            "value {} vs optimum {} (sigma {})",
            e.value,
            opt.value,
            e.sigma
        );
    }

    #[test]
    fn simulated_chained_six_on_werner() {
        let v = 0.94;
        let s = werner_state(WernerParams::new(v).unwrap());
        let t = catalog_chained(6).unwrap();
        let opt = optimize_settings(&t, &s, 4, 2).unwrap();
        let expected = 12.0 * v * (PI / 12.0).cos();
        assert_abs_diff_eq!(opt.value, expected, epsilon = 1e-9);
        let schedule = measurement_schedule(&t, &opt.settings).unwrap();
        let records = simulate_counts(&s, &config(29), &schedule).unwrap();
        let e = bell_value_from_counts(&t, &opt.settings, &records).unwrap();
        assert!((e.value - expected).abs() < 4.0 * e.sigma);
    }

    #[test]
    fn longer_integration_shrinks_sigma() {
        let s = measured_state();
        let t = catalog_chsh();
        let opt = optimize_settings(&t, &s, 8, 1).unwrap();
        let schedule = measurement_schedule(&t, &opt.settings).unwrap();
        let short = SourceConfig::new(4200.0, 2.0, 77).unwrap();
        let long = SourceConfig::new(4200.0, 200.0, 77).unwrap();
        let e_short = bell_value_from_counts(
            &t,
            &opt.settings,
            &simulate_counts(&s, &short, &schedule).unwrap(),
        )
        .unwrap();
        let e_long = bell_value_from_counts(
            &t,
            &opt.settings,
            &simulate_counts(&s, &long, &schedule).unwrap(),
        )
        .unwrap();
        let ratio = e_short.sigma / e_long.sigma;
        assert!((ratio - 10.0).abs() < 3.0, "ratio {ratio}");
    }

    #[test]
    fn polarizer_convention_round_trip() {
        // estimating at polarizer pair (0, 0) targets the zz coefficient
        let s = measured_state();
        let long = SourceConfig::new(4200.0, 2000.0, 13).unwrap();
        let records = simulate_counts(&s, &long, &orientation_quadruple(0.0, 0.0)).unwrap();
        let e = correlation_from_counts(
            records[0].counts,
            records[1].counts,
            records[2].counts,
            records[3].counts,
        )
        .unwrap();
        assert!((e.value - s.c_zz).abs() < 4.0 * e.sigma);
        // and (22.5, 22.5) targets the Bloch 45-degree diagonal
        let records = simulate_counts(&s, &long, &orientation_quadruple(22.5, 22.5)).unwrap();
        let e = correlation_from_counts(
            records[0].counts,
            records[1].counts,
            records[2].counts,
            records[3].counts,
        )
        .unwrap();
        let expected = evaluate(
            &InequalityTable::new("probe", vec![0.0], vec![0.0], vec![vec![1.0]], 1.0).unwrap(),
            &s,
            &SettingsVector::new(
                vec![Angle::from_degrees(45.0)],
                vec![Angle::from_degrees(45.0)],
            ),
        )
        .unwrap();
        assert!((e.value - expected).abs() < 4.0 * e.sigma);
    }
}
