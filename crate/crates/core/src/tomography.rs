//! Partial state tomography: reconstructing the 8 xz-plane coefficients from
//! linear-polarization coincidence counts.
//!
//! Only the z and x Pauli directions are accessible with polarizers alone, so
//! the reconstruction covers the xz Bloch plane. Coefficients are reported
//! raw (clamped per coefficient to [-1, 1], no likelihood projection), with a
//! physicality flag from scanning the in-plane outcome probabilities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::{
    alice_marginal_from_counts, bob_marginal_from_counts, correlation_from_counts,
    marginal_from_counts, CountRecord, CountSet, Estimate, PolarizerPair,
};
use crate::qstate::{outcome_probabilities, Angle, XZState};

/// Polarizer angles measuring the z (0°) and x (45°) directions.
pub const BASIS_DEGREES: [f64; 2] = [0.0, 45.0];
/// Points per angle in the physicality scan.
const GRID_POINTS: usize = 72;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TomographyResult {
    pub state: XZState,
    /// One-sigma errors in the order a_z, a_x, b_z, b_x, c_zz, c_zx, c_xz,
    /// c_xx (matching [`XZState::coefficients`]).
    pub sigmas: [f64; 8],
    /// True when every in-plane outcome probability on the scan grid is
    /// non-negative and no coefficient needed clamping.
    pub physical: bool,
}

/// The 16 polarizer pairs of the partial tomography: the 4 basis pairs
/// {0°, 45°} × {0°, 45°}, each acquired in 4 orientations (+90°
/// complements).
pub fn tomography_schedule() -> Vec<PolarizerPair> {
    let mut schedule = Vec::with_capacity(16);
    for a in BASIS_DEGREES {
        for b in BASIS_DEGREES {
            schedule.extend(crate::experiment::orientation_quadruple(a, b));
        }
    }
    schedule
}

fn clamp_coefficient(e: Estimate, clamped: &mut bool) -> (f64, f64) {
    let v = e.value.clamp(-1.0, 1.0);
    if v != e.value {
        *clamped = true;
    }
    (v, e.sigma)
}

/// Reconstruct the state from counts covering [`tomography_schedule`].
///
/// The four correlation coefficients come from their basis quadruples; each
/// marginal is measured against both of the partner's bases and combined with
/// the max-rule (mean value, error inflated by half the spread).
pub fn estimate_state(records: &[CountRecord]) -> Result<TomographyResult> {
    let set = CountSet::new(records);
    let mut missing = Vec::new();
    let mut quads = [[None; 2]; 2];
    for (i, a) in BASIS_DEGREES.iter().enumerate() {
        for (j, b) in BASIS_DEGREES.iter().enumerate() {
            quads[i][j] = set.quadruple(*a, *b, &mut missing);
        }
    }
    if !missing.is_empty() {
        missing.sort();
        missing.dedup();
        return Err(Error::IncompleteCounts { missing });
    }
    let quads: [[[u64; 4]; 2]; 2] =
        [[quads[0][0].unwrap(), quads[0][1].unwrap()], [quads[1][0].unwrap(), quads[1][1].unwrap()]];

    let correlation = |i: usize, j: usize| -> Result<Estimate> {
        let [pp, pm, mp, mm] = quads[i][j];
        correlation_from_counts(pp, pm, mp, mm)
    };
    let alice_marginal = |i: usize| -> Result<Estimate> {
        let pair: Vec<Estimate> = (0..2)
            .map(|j| {
                let [pp, pm, mp, mm] = quads[i][j];
                alice_marginal_from_counts(pp, pm, mp, mm)
            })
            .collect::<Result<_>>()?;
        marginal_from_counts(&pair)
    };
    let bob_marginal = |j: usize| -> Result<Estimate> {
        let pair: Vec<Estimate> = (0..2)
            .map(|i| {
                let [pp, pm, mp, mm] = quads[i][j];
                bob_marginal_from_counts(pp, pm, mp, mm)
            })
            .collect::<Result<_>>()?;
        marginal_from_counts(&pair)
    };

    let mut clamped = false;
    let (a_z, s_az) = clamp_coefficient(alice_marginal(0)?, &mut clamped);
    let (a_x, s_ax) = clamp_coefficient(alice_marginal(1)?, &mut clamped);
    let (b_z, s_bz) = clamp_coefficient(bob_marginal(0)?, &mut clamped);
    let (b_x, s_bx) = clamp_coefficient(bob_marginal(1)?, &mut clamped);
    let (c_zz, s_zz) = clamp_coefficient(correlation(0, 0)?, &mut clamped);
    let (c_zx, s_zx) = clamp_coefficient(correlation(0, 1)?, &mut clamped);
    let (c_xz, s_xz) = clamp_coefficient(correlation(1, 0)?, &mut clamped);
    let (c_xx, s_xx) = clamp_coefficient(correlation(1, 1)?, &mut clamped);

    let state = XZState::new(a_z, a_x, b_z, b_x, c_zz, c_zx, c_xz, c_xx)?;
    let physical = !clamped && in_plane_physical(&state);
    Ok(TomographyResult {
        state,
        sigmas: [s_az, s_ax, s_bz, s_bx, s_zz, s_zx, s_xz, s_xx],
        physical,
    })
}

/// Scan all four outcome probabilities over a GRID_POINTS x GRID_POINTS
/// in-plane angle grid.
pub fn in_plane_physical(state: &XZState) -> bool {
    let step = std::f64::consts::TAU / GRID_POINTS as f64;
    for i in 0..GRID_POINTS {
        let alpha = Angle::from_radians(i as f64 * step);
        for j in 0..GRID_POINTS {
            let beta = Angle::from_radians(j as f64 * step);
            if outcome_probabilities(state, alpha, beta).is_err() {
                return false;
            }
        }
    }
    true
}
