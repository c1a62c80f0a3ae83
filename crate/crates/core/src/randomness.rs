//! Certified randomness from Bell violations: bounds on the predictability of
//! one party's outcome, converted to min-entropy per measurement.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::Estimate;
use crate::inequality::InequalityTable;
use crate::polytope::{ns_marginal_bound_max, ns_max, quantum_marginal_bound_chsh};

/// Min-entropy of an outcome whose largest probability is `p_star`:
/// `-log2(p_star)` bits.
pub fn min_entropy(p_star: f64) -> Result<f64> {
    if !(p_star > 0.0 && p_star <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "probability {p_star} outside (0, 1]"
        )));
    }
    // + 0.0 normalizes the -0.0 produced at p_star = 1
    Ok(-p_star.log2() + 0.0)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RandomnessReport {
    pub inequality: String,
    pub observed: Estimate,
    /// Largest outcome probability over no-signaling adversaries.
    pub p_star_ns: Estimate,
    pub hmin_ns: Estimate,
    /// Tighter quantum bound, available for CHSH only.
    pub p_star_quantum: Option<Estimate>,
    pub hmin_quantum: Option<Estimate>,
    /// All bounds assume fair sampling of the detected events.
    pub fair_sampling_assumed: bool,
}

fn entropy_estimate(p: Estimate) -> Result<Estimate> {
    let value = min_entropy(p.value)?;
    Ok(Estimate::new(value, p.sigma / (p.value * std::f64::consts::LN_2)))
}

/// Propagate the error of the observed value through a marginal-probability
/// bound by central finite difference, evaluation points clamped to the
/// bound's domain.
fn propagate<F: FnMut(f64) -> Result<f64>>(
    observed: Estimate,
    lo: f64,
    hi: f64,
    mut bound: F,
) -> Result<Estimate> {
    let value = bound(observed.value.clamp(lo, hi))?;
    if observed.sigma == 0.0 {
        return Ok(Estimate::new(value, 0.0));
    }
    let up = bound((observed.value + observed.sigma).clamp(lo, hi))?;
    let down = bound((observed.value - observed.sigma).clamp(lo, hi))?;
    Ok(Estimate::new(value, 0.5 * (up - down).abs()))
}

/// Full randomness summary for one measured Bell value: the no-signaling
/// predictability bound (maximized over parties, settings and outcomes), the
/// quantum bound where known, and the corresponding min-entropies.
pub fn report(table: &InequalityTable, observed: Estimate) -> Result<RandomnessReport> {
    let ns = ns_max(table)?;
    let local = table.local_bound();
    if observed.value < local - 1e-9 || observed.value > ns + 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "observed value {} outside the certifiable range [{local}, {ns}]",
            observed.value
        )));
    }
    // LP round-off can leave the bound epsilon outside [1/2, 1]
    let mut p_star_ns =
        propagate(observed, local, ns, |v| ns_marginal_bound_max(table, v))?;
    p_star_ns.value = p_star_ns.value.clamp(0.5, 1.0);
    let hmin_ns = entropy_estimate(p_star_ns)?;

    let (p_star_quantum, hmin_quantum) = if table.name() == "chsh" {
        let p = propagate(observed, 2.0, 2.0 * 2.0_f64.sqrt(), quantum_marginal_bound_chsh)?;
        let h = entropy_estimate(p)?;
        (Some(p), Some(h))
    } else {
        (None, None)
    };

    Ok(RandomnessReport {
        inequality: table.name().to_string(),
        observed,
        p_star_ns,
        hmin_ns,
        p_star_quantum,
        hmin_quantum,
        fair_sampling_assumed: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inequality::{catalog_chained, catalog_chsh};
    use approx::assert_abs_diff_eq;

    #[test]
    fn min_entropy_values() {
        assert_abs_diff_eq!(min_entropy(0.684).unwrap(), 0.548, epsilon = 1e-3);
        assert_abs_diff_eq!(min_entropy(0.5).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(min_entropy(1.0).unwrap(), 0.0, epsilon = 1e-15);
        assert!(min_entropy(0.0).is_err());
        assert!(min_entropy(-0.2).is_err());
        assert!(min_entropy(1.1).is_err());
    }

    #[test]
    fn chained_four_report() {
        let t = catalog_chained(4).unwrap();
        let r = report(&t, Estimate::new(7.018, 0.023)).unwrap();
        assert_abs_diff_eq!(r.p_star_ns.value, 0.7455, epsilon = 1e-4);
        // analytic slope is -1/4, so the propagated error is sigma / 4
        assert_abs_diff_eq!(r.p_star_ns.sigma, 0.00575, epsilon = 0.00575 * 0.15);
        assert!(r.p_star_quantum.is_none());
        assert_abs_diff_eq!(
            r.hmin_ns.value,
            -r.p_star_ns.value.log2(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn chsh_report_includes_quantum_bound() {
        let r = report(&catalog_chsh(), Estimate::new(2.731, 0.015)).unwrap();
        let q = r.p_star_quantum.unwrap();
        assert_abs_diff_eq!(q.value, 0.684, epsilon = 1e-3);
        assert_abs_diff_eq!(q.sigma, 0.014, epsilon = 1.5e-3);
        let h = r.hmin_quantum.unwrap();
        assert_abs_diff_eq!(h.value, 0.548, epsilon = 1e-3);
        assert_abs_diff_eq!(h.sigma, 0.03, epsilon = 5e-3);
        // the NS bound is weaker than the quantum one
        assert!(r.p_star_ns.value >= q.value - 1e-9);
        assert!(r.fair_sampling_assumed);
    }

    #[test]
    fn no_violation_certifies_nothing() {
        let r = report(&catalog_chsh(), Estimate::new(2.0, 0.01)).unwrap();
        assert_abs_diff_eq!(r.p_star_ns.value, 1.0, epsilon = 1e-7);
        assert_abs_diff_eq!(r.hmin_ns.value, 0.0, epsilon = 1e-7);
    }

    #[test]
    fn out_of_range_observed_rejected() {
        assert!(report(&catalog_chsh(), Estimate::new(1.5, 0.01)).is_err());
        assert!(report(&catalog_chsh(), Estimate::new(4.1, 0.01)).is_err());
    }

    #[test]
    fn hmin_matches_p_star_everywhere() {
        let t = catalog_chained(3).unwrap();
        for k in 0..8 {
            let v = 4.0 + k as f64 * 0.25;
            let r = report(&t, Estimate::new(v, 0.02)).unwrap();
            assert_abs_diff_eq!(r.hmin_ns.value, -r.p_star_ns.value.log2(), epsilon = 1e-12);
        }
    }

    #[test]
    fn p_star_monotone_in_observed() {
        let t = catalog_chained(3).unwrap();
        let mut prev = f64::INFINITY;
        for k in 0..=10 {
            let v = 4.0 + 2.0 * k as f64 / 10.0;
            let r = report(&t, Estimate::new(v, 0.0)).unwrap();
            assert!(r.p_star_ns.value <= prev + 1e-9);
            prev = r.p_star_ns.value;
        }
    }

    #[test]
    fn edge_values_use_one_sided_differences() {
        let t = catalog_chained(3).unwrap();
        // at the NS maximum the upward point clamps; sigma stays finite
        let r = report(&t, Estimate::new(6.0, 0.02)).unwrap();
        assert!(r.p_star_ns.sigma.is_finite());
        assert_abs_diff_eq!(r.p_star_ns.value, 0.5, epsilon = 1e-6);
    }
}
