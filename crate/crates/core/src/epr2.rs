//! Local-content analysis: how much of an observed chained-inequality
//! violation can be attributed to a local model.
//!
//! Writing the observed correlations as a mixture of a local part (weight
//! p_L, value at most 2(N-1)) and a no-signaling part (value at most 2N),
//! the local weight is bounded by p_L <= N - I/2.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::Estimate;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocalContentBound {
    pub n: usize,
    pub observed: Estimate,
    pub p_l_max: Estimate,
    /// Set when the raw bound fell outside [0, 1] and was clamped.
    pub clamped: bool,
}

/// Upper bound on the local content from an N-setting chained-inequality
/// value, `N - I/2`, clamped to [0, 1]. The error is plain linear
/// propagation, sigma/2.
pub fn local_content_bound(n: usize, observed: Estimate) -> Result<LocalContentBound> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "chained inequalities need at least 2 settings, got {n}"
        )));
    }
    let ns_max = 2.0 * n as f64;
    if observed.value > ns_max {
        return Err(Error::AboveNoSignalingMax {
            observed: observed.value,
            ns_max,
        });
    }
    let raw = n as f64 - observed.value / 2.0;
    let value = raw.clamp(0.0, 1.0);
    Ok(LocalContentBound {
        n,
        observed,
        p_l_max: Estimate::new(value, observed.sigma / 2.0),
        clamped: value != raw,
    })
}

/// Maximum of the N-setting chained expression on a visibility-V Werner
/// state: `2 N V cos(pi / 2N)`.
pub fn werner_chained_value(n: usize, visibility: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "chained inequalities need at least 2 settings, got {n}"
        )));
    }
    if !(0.0..=1.0).contains(&visibility) {
        return Err(Error::InvalidVisibility(visibility));
    }
    Ok(2.0 * n as f64 * visibility * (std::f64::consts::PI / (2.0 * n as f64)).cos())
}

/// Local-content bound of an ideal Werner-state experiment as a function of
/// the number of settings: `N (1 - V cos(pi / 2N))`.
pub fn werner_plmax_curve(
    visibility: f64,
    n_range: impl IntoIterator<Item = usize>,
) -> Result<Vec<(usize, f64)>> {
    n_range
        .into_iter()
        .map(|n| {
            let bound = local_content_bound(n, Estimate::new(werner_chained_value(n, visibility)?, 0.0))?;
            Ok((n, bound.p_l_max.value))
        })
        .collect()
}

/// The strongest (smallest) bound among several measurements; ties broken by
/// smaller sigma, then by smaller N.
pub fn best_local_bound(measurements: &[LocalContentBound]) -> Result<LocalContentBound> {
    measurements
        .iter()
        .min_by(|a, b| {
            (a.p_l_max.value, a.p_l_max.sigma, a.n)
                .partial_cmp(&(b.p_l_max.value, b.p_l_max.sigma, b.n))
                .expect("bounds are finite")
        })
        .cloned()
        .ok_or_else(|| Error::InvalidArgument("no local-content bounds to compare".into()))
}
