//! Two-qubit states restricted to the xz plane of the Bloch sphere.
//!
//! A state is described by the eight expectation coefficients reachable with
//! linear-polarization measurements: two marginal coefficients per party and
//! a 2x2 joint-coefficient block. All measurement statistics used elsewhere
//! in the crate derive from these.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Tolerance for outcome-probability positivity. Values in `[-TOL, 0)` and
/// `(1, 1 + TOL]` are clamped, anything further out is rejected.
pub const PROBABILITY_TOL: f64 = 1e-9;

/// A measurement angle in the xz Bloch plane, stored in radians and
/// normalized to `[0, 2*pi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Angle(f64);

impl Angle {
    pub fn from_radians(theta: f64) -> Self {
        Angle(theta.rem_euclid(TAU))
    }

    pub fn from_degrees(deg: f64) -> Self {
        Self::from_radians(deg.to_radians())
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    pub fn degrees(self) -> f64 {
        self.0.to_degrees()
    }

    pub fn cos(self) -> f64 {
        self.0.cos()
    }

    pub fn sin(self) -> f64 {
        self.0.sin()
    }
}

/// Werner-state parameter: singlet visibility.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WernerParams {
    pub visibility: f64,
}

impl WernerParams {
    pub fn new(visibility: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&visibility) {
            return Err(Error::InvalidVisibility(visibility));
        }
        Ok(WernerParams { visibility })
    }
}

/// The eight xz-plane expectation coefficients of a two-qubit state.
///
/// `a_*` are Alice's marginal coefficients, `b_*` Bob's, and `c_**` the joint
/// block, first index Alice. Every coefficient lies in `[-1, 1]`. Global
/// positivity of the underlying density matrix is not (and cannot be)
/// enforced from these eight numbers; only in-plane probability positivity
/// is checked, at the point of use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawXZState")]
pub struct XZState {
    pub a_z: f64,
    pub a_x: f64,
    pub b_z: f64,
    pub b_x: f64,
    pub c_zz: f64,
    pub c_zx: f64,
    pub c_xz: f64,
    pub c_xx: f64,
}

#[derive(Deserialize)]
struct RawXZState {
    a_z: f64,
    a_x: f64,
    b_z: f64,
    b_x: f64,
    c_zz: f64,
    c_zx: f64,
    c_xz: f64,
    c_xx: f64,
}

impl TryFrom<RawXZState> for XZState {
    type Error = Error;

    fn try_from(r: RawXZState) -> Result<Self> {
        XZState::new(r.a_z, r.a_x, r.b_z, r.b_x, r.c_zz, r.c_zx, r.c_xz, r.c_xx)
    }
}

impl XZState {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a_z: f64,
        a_x: f64,
        b_z: f64,
        b_x: f64,
        c_zz: f64,
        c_zx: f64,
        c_xz: f64,
        c_xx: f64,
    ) -> Result<Self> {
        let fields = [
            ("a_z", a_z),
            ("a_x", a_x),
            ("b_z", b_z),
            ("b_x", b_x),
            ("c_zz", c_zz),
            ("c_zx", c_zx),
            ("c_xz", c_xz),
            ("c_xx", c_xx),
        ];
        for (name, value) in fields {
            if !(-1.0..=1.0).contains(&value) || value.is_nan() {
                return Err(Error::CoefficientOutOfRange { name, value });
            }
        }
        Ok(XZState {
            a_z,
            a_x,
            b_z,
            b_x,
            c_zz,
            c_zx,
            c_xz,
            c_xx,
        })
    }

    /// The ideal singlet: perfect anticorrelation along every axis in the plane.
    pub fn singlet() -> Self {
        XZState {
            a_z: 0.0,
            a_x: 0.0,
            b_z: 0.0,
            b_x: 0.0,
            c_zz: -1.0,
            c_zx: 0.0,
            c_xz: 0.0,
            c_xx: -1.0,
        }
    }

    /// The maximally mixed state: all coefficients zero.
    pub fn maximally_mixed() -> Self {
        XZState {
            a_z: 0.0,
            a_x: 0.0,
            b_z: 0.0,
            b_x: 0.0,
            c_zz: 0.0,
            c_zx: 0.0,
            c_xz: 0.0,
            c_xx: 0.0,
        }
    }

    pub fn coefficients(&self) -> [f64; 8] {
        [
            self.a_z, self.a_x, self.b_z, self.b_x, self.c_zz, self.c_zx, self.c_xz, self.c_xx,
        ]
    }
}

/// Mixture of a singlet with visibility `V` and white noise `1 - V`:
/// `c_zz = c_xx = -V`, everything else zero.
pub fn werner_state(params: WernerParams) -> XZState {
    let v = params.visibility;
    XZState {
        a_z: 0.0,
        a_x: 0.0,
        b_z: 0.0,
        b_x: 0.0,
        c_zz: -v,
        c_zx: 0.0,
        c_xz: 0.0,
        c_xx: -v,
    }
}

/// Alice's expected marginal when measuring along `alpha`.
pub fn marginal_alice(state: &XZState, alpha: Angle) -> f64 {
    alpha.cos() * state.a_z + alpha.sin() * state.a_x
}

/// Bob's expected marginal when measuring along `beta`.
pub fn marginal_bob(state: &XZState, beta: Angle) -> f64 {
    beta.cos() * state.b_z + beta.sin() * state.b_x
}

/// Expected joint correlation for measurements along `alpha` (Alice) and
/// `beta` (Bob).
pub fn joint(state: &XZState, alpha: Angle, beta: Angle) -> f64 {
    let (ca, sa) = (alpha.cos(), alpha.sin());
    let (cb, sb) = (beta.cos(), beta.sin());
    ca * cb * state.c_zz + ca * sb * state.c_zx + sa * cb * state.c_xz + sa * sb * state.c_xx
}

/// The four joint outcome probabilities `p(a, b)` in the order
/// `(+,+), (+,-), (-,+), (-,-)`.
///
/// Reconstructed as `p(a,b) = (1 + a E_A + b E_B + ab E_AB) / 4`. Values
/// within [`PROBABILITY_TOL`] outside `[0, 1]` are clamped; anything further
/// out signals an unphysical state.
pub fn outcome_probabilities(state: &XZState, alpha: Angle, beta: Angle) -> Result<[f64; 4]> {
    let ea = marginal_alice(state, alpha);
    let eb = marginal_bob(state, beta);
    let eab = joint(state, alpha, beta);
    let mut probs = [0.0; 4];
    for (k, (a, b)) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)]
        .into_iter()
        .enumerate()
    {
        let p = (1.0 + a * ea + b * eb + a * b * eab) / 4.0;
        if !(-PROBABILITY_TOL..=1.0 + PROBABILITY_TOL).contains(&p) {
            return Err(Error::UnphysicalState {
                probability: p,
                alpha: alpha.radians(),
                beta: beta.radians(),
            });
        }
        probs[k] = p.clamp(0.0, 1.0);
    }
    Ok(probs)
}

/// Coefficients measured on a commercial photon-pair source, used as a
/// realistic fixture across the crate's tests.
#[cfg(test)]
pub(crate) fn measured_state() -> XZState {
    XZState::new(
        0.065, 0.036, -0.078, -0.015, -0.9649, 0.1053, -0.0201, -0.9344,
    )
    .unwrap()
}
