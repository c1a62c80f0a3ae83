//! Bell inequalities as coefficient tables, the built-in catalog, evaluation
//! on xz-plane states, local bounds and noise tolerance.
//!
//! An N-setting binary-outcome correlation inequality is written as
//! `sum_i n_i E(alpha_i) + sum_j m_j E(beta_j) + sum_ij l_ij E(alpha_i, beta_j) <= I_L`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{joint, marginal_alice, marginal_bob, Angle, XZState};

/// Largest N for which the deterministic-strategy enumeration is allowed.
pub const BRUTEFORCE_MAX_SETTINGS: usize = 16;

/// Coefficient table of an N x N-setting binary-outcome Bell inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTable", into = "RawTable")]
pub struct InequalityTable {
    name: String,
    alice_marginals: Vec<f64>,
    bob_marginals: Vec<f64>,
    joint: Vec<Vec<f64>>,
    local_bound: f64,
}

#[derive(Serialize, Deserialize, Clone)]
struct RawTable {
    name: String,
    n: usize,
    alice_marginals: Vec<f64>,
    bob_marginals: Vec<f64>,
    joint: Vec<Vec<f64>>,
    local_bound: f64,
}

impl TryFrom<RawTable> for InequalityTable {
    type Error = Error;

    fn try_from(r: RawTable) -> Result<Self> {
        let t = InequalityTable::new(
            r.name,
            r.alice_marginals,
            r.bob_marginals,
            r.joint,
            r.local_bound,
        )?;
        if t.n() != r.n {
            return Err(Error::DimensionMismatch(format!(
                "declared n = {} but coefficient vectors have length {}",
                r.n,
                t.n()
            )));
        }
        Ok(t)
    }
}

impl From<InequalityTable> for RawTable {
    fn from(t: InequalityTable) -> Self {
        RawTable {
            n: t.n(),
            name: t.name,
            alice_marginals: t.alice_marginals,
            bob_marginals: t.bob_marginals,
            joint: t.joint,
            local_bound: t.local_bound,
        }
    }
}

impl InequalityTable {
    pub fn new(
        name: impl Into<String>,
        alice_marginals: Vec<f64>,
        bob_marginals: Vec<f64>,
        joint: Vec<Vec<f64>>,
        local_bound: f64,
    ) -> Result<Self> {
        let n = alice_marginals.len();
        if n == 0 {
            return Err(Error::DimensionMismatch("empty table".into()));
        }
        if bob_marginals.len() != n || joint.len() != n || joint.iter().any(|row| row.len() != n) {
            return Err(Error::DimensionMismatch(format!(
                "inconsistent table dimensions for N = {n}"
            )));
        }
        Ok(InequalityTable {
            name: name.into(),
            alice_marginals,
            bob_marginals,
            joint,
            local_bound,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Settings per side.
    pub fn n(&self) -> usize {
        self.alice_marginals.len()
    }

    pub fn alice_marginals(&self) -> &[f64] {
        &self.alice_marginals
    }

    pub fn bob_marginals(&self) -> &[f64] {
        &self.bob_marginals
    }

    pub fn joint_coeffs(&self) -> &[Vec<f64>] {
        &self.joint
    }

    pub fn local_bound(&self) -> f64 {
        self.local_bound
    }

    pub fn has_marginal_terms(&self) -> bool {
        self.alice_marginals.iter().any(|&c| c != 0.0)
            || self.bob_marginals.iter().any(|&c| c != 0.0)
    }
}

/// Measurement angles for both parties, matching a table's setting count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingsVector {
    pub alice: Vec<Angle>,
    pub bob: Vec<Angle>,
}

impl SettingsVector {
    pub fn new(alice: Vec<Angle>, bob: Vec<Angle>) -> Self {
        SettingsVector { alice, bob }
    }
}

/// CHSH: two settings per side, correlation terms only, local bound 2.
pub fn catalog_chsh() -> InequalityTable {
    InequalityTable::new(
        "chsh",
        vec![0.0; 2],
        vec![0.0; 2],
        vec![vec![1.0, 1.0], vec![-1.0, 1.0]],
        2.0,
    )
    .expect("static table")
}

/// The three-setting inequality inequivalent to CHSH, local bound 4.
pub fn catalog_i3322() -> InequalityTable {
    InequalityTable::new(
        "i3322",
        vec![1.0, 1.0, 0.0],
        vec![1.0, 1.0, 0.0],
        vec![
            vec![-1.0, -1.0, -1.0],
            vec![-1.0, -1.0, 1.0],
            vec![-1.0, 1.0, 0.0],
        ],
        4.0,
    )
    .expect("static table")
}

/// First of the two correlation-only four-setting inequalities, local bound 6.
pub fn catalog_as1() -> InequalityTable {
    InequalityTable::new(
        "as1",
        vec![0.0; 4],
        vec![0.0; 4],
        vec![
            vec![1.0, 1.0, 1.0, 1.0],
            vec![1.0, 1.0, 1.0, -1.0],
            vec![1.0, 1.0, -2.0, 0.0],
            vec![1.0, -1.0, 0.0, 0.0],
        ],
        6.0,
    )
    .expect("static table")
}

/// Second correlation-only four-setting inequality, local bound 10.
pub fn catalog_as2() -> InequalityTable {
    InequalityTable::new(
        "as2",
        vec![0.0; 4],
        vec![0.0; 4],
        vec![
            vec![2.0, 1.0, 1.0, 2.0],
            vec![1.0, 1.0, 2.0, -2.0],
            vec![1.0, 2.0, -2.0, -1.0],
            vec![2.0, -2.0, -1.0, -1.0],
        ],
        10.0,
    )
    .expect("static table")
}

/// Chained inequality with N settings per side: the 2N cyclically linked
/// correlation terms, +1 on the chain pairs and -1 closing the cycle, local
/// bound 2(N-1).
pub fn catalog_chained(n: usize) -> Result<InequalityTable> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "chained inequality needs at least 2 settings, got {n}"
        )));
    }
    let mut joint = vec![vec![0.0; n]; n];
    for k in 0..n {
        joint[k][k] += 1.0; // E(alpha_k, beta_k)
        if k + 1 < n {
            joint[k + 1][k] += 1.0; // E(beta_k, alpha_{k+1})
        }
    }
    joint[0][n - 1] -= 1.0; // -E(beta_N, alpha_1)
    InequalityTable::new(
        format!("chained:{n}"),
        vec![0.0; n],
        vec![0.0; n],
        joint,
        2.0 * (n as f64 - 1.0),
    )
}

/// Parse a catalog reference: `chsh`, `i3322`, `as1`, `as2` or `chained:N`.
pub fn parse_reference(reference: &str) -> Result<InequalityTable> {
    match reference {
        "chsh" => Ok(catalog_chsh()),
        "i3322" => Ok(catalog_i3322()),
        "as1" => Ok(catalog_as1()),
        "as2" => Ok(catalog_as2()),
        other => {
            if let Some(ns) = other.strip_prefix("chained:") {
                let n: usize = ns.parse().map_err(|_| {
                    Error::InvalidArgument(format!("bad chained setting count '{ns}'"))
                })?;
                catalog_chained(n)
            } else {
                Err(Error::InvalidArgument(format!(
                    "unknown inequality reference '{other}'"
                )))
            }
        }
    }
}

/// The references listed by the catalog command: the four named inequalities
/// plus chained:2..=6.
pub fn catalog_references() -> Vec<String> {
    let mut refs = vec![
        "chsh".to_string(),
        "i3322".to_string(),
        "as1".to_string(),
        "as2".to_string(),
    ];
    for n in 2..=6 {
        refs.push(format!("chained:{n}"));
    }
    refs
}

/// Bell expression value of `table` on `state` at the given settings.
pub fn evaluate(table: &InequalityTable, state: &XZState, settings: &SettingsVector) -> Result<f64> {
    let n = table.n();
    if settings.alice.len() != n || settings.bob.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "table has {n} settings per side, got {} Alice / {} Bob angles",
            settings.alice.len(),
            settings.bob.len()
        )));
    }
    let mut total = 0.0;
    for (i, &alpha) in settings.alice.iter().enumerate() {
        total += table.alice_marginals[i] * marginal_alice(state, alpha);
    }
    for (j, &beta) in settings.bob.iter().enumerate() {
        total += table.bob_marginals[j] * marginal_bob(state, beta);
    }
    for (i, &alpha) in settings.alice.iter().enumerate() {
        for (j, &beta) in settings.bob.iter().enumerate() {
            let l = table.joint[i][j];
            if l != 0.0 {
                total += l * joint(state, alpha, beta);
            }
        }
    }
    Ok(total)
}

/// Maximum of the Bell expression over all deterministic local strategies
/// (every assignment a_i, b_j in {-1, +1}).
///
/// Alice's assignments are enumerated; for each one Bob's optimal assignment
/// is b_j = sign(m_j + sum_i l_ij a_i), which attains the enumeration maximum
/// exactly since the expression is linear in each b_j.
pub fn local_bound_bruteforce(table: &InequalityTable) -> Result<f64> {
    let n = table.n();
    if n > BRUTEFORCE_MAX_SETTINGS {
        return Err(Error::BruteForceTooLarge {
            got: n,
            max: BRUTEFORCE_MAX_SETTINGS,
        });
    }
    let mut best = f64::NEG_INFINITY;
    for mask in 0u32..(1u32 << n) {
        let a: Vec<f64> = (0..n)
            .map(|i| if mask & (1 << i) != 0 { 1.0 } else { -1.0 })
            .collect();
        let mut value: f64 = (0..n).map(|i| table.alice_marginals[i] * a[i]).sum();
        for j in 0..n {
            let col: f64 = table.bob_marginals[j]
                + (0..n).map(|i| table.joint[i][j] * a[i]).sum::<f64>();
            value += col.abs();
        }
        best = best.max(value);
    }
    Ok(best)
}

/// Critical white-noise fraction `max(0, 1 - I_L / I_exp)` above which the
/// violation disappears.
///
/// Assumes white noise contributes zero to the Bell value, which holds for
/// zero-marginal tables and for any table whose value vanishes on the
/// maximally mixed state (true of the whole catalog).
pub fn noise_tolerance(local_bound: f64, observed: f64) -> Result<f64> {
    if observed <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "noise tolerance needs a positive Bell value, got {observed}"
        )));
    }
    Ok((1.0 - local_bound / observed).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::measured_state;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn chsh_table_shape() {
        let t = catalog_chsh();
        assert_eq!(t.n(), 2);
        assert_eq!(t.joint_coeffs()[0][0], 1.0);
        assert_eq!(t.joint_coeffs()[1][0], -1.0);
        assert!(t.alice_marginals().iter().all(|&c| c == 0.0));
        assert!(t.bob_marginals().iter().all(|&c| c == 0.0));
        assert_eq!(t.local_bound(), 2.0);
    }

    #[test]
    fn i3322_table_shape() {
        let t = catalog_i3322();
        assert_eq!(t.bob_marginals(), &[1.0, 1.0, 0.0]);
        assert_eq!(t.joint_coeffs()[2][2], 0.0);
        assert_eq!(t.local_bound(), 4.0);
    }

    #[test]
    fn as_tables_shape() {
        let t1 = catalog_as1();
        assert_eq!(t1.joint_coeffs()[2][3], 0.0);
        assert_eq!(t1.local_bound(), 6.0);
        let t2 = catalog_as2();
        assert_eq!(t2.joint_coeffs()[0][0], 2.0);
        assert_eq!(t2.local_bound(), 10.0);
    }

    #[test]
    fn chained_structure() {
        assert!(catalog_chained(1).is_err());
        assert_eq!(catalog_chained(5).unwrap().local_bound(), 8.0);

        let t = catalog_chained(6).unwrap();
        let mut plus = 0;
        let mut minus = 0;
        for row in t.joint_coeffs() {
            for &c in row {
                if c == 1.0 {
                    plus += 1;
                } else if c == -1.0 {
                    minus += 1;
                } else {
                    assert_eq!(c, 0.0);
                }
            }
        }
        assert_eq!((plus, minus), (11, 1));
    }

    #[test]
    fn chained_two_matches_chsh() {
        let c2 = catalog_chained(2).unwrap();
        assert_eq!(local_bound_bruteforce(&c2).unwrap(), 2.0);
        // same optimal singlet value as CHSH (relabeled table)
        let opt = crate::optimizer::optimize_settings(&c2, &XZState::singlet(), 16, 7).unwrap();
        assert_abs_diff_eq!(opt.value, 2.0 * 2.0_f64.sqrt(), epsilon = 1e-6);
    }

    #[test]
    fn bruteforce_matches_catalog_bounds() {
        for reference in catalog_references() {
            let t = parse_reference(&reference).unwrap();
            assert_eq!(
                local_bound_bruteforce(&t).unwrap(),
                t.local_bound(),
                "local bound mismatch for {reference}"
            );
        }
        assert_eq!(
            local_bound_bruteforce(&catalog_chained(4).unwrap()).unwrap(),
            6.0
        );
    }

    #[test]
    fn bruteforce_rejects_large_tables() {
        let t = catalog_chained(17).unwrap();
        assert!(matches!(
            local_bound_bruteforce(&t),
            Err(Error::BruteForceTooLarge { .. })
        ));
    }

    #[test]
    fn evaluate_chsh_singlet_tsirelson() {
        // E = -cos(alpha - beta) for the singlet; these settings attain 2*sqrt(2)
        let t = catalog_chsh();
        let settings = SettingsVector::new(
            vec![Angle::from_radians(0.0), Angle::from_radians(PI / 2.0)],
            vec![
                Angle::from_radians(PI - PI / 4.0),
                Angle::from_radians(PI + PI / 4.0),
            ],
        );
        let v = evaluate(&t, &XZState::singlet(), &settings).unwrap();
        assert_abs_diff_eq!(v, 2.0 * 2.0_f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn evaluate_zero_marginal_table_on_mixed_state() {
        let t = catalog_as2();
        let settings = SettingsVector::new(
            (0..4).map(|k| Angle::from_radians(k as f64)).collect(),
            (0..4).map(|k| Angle::from_radians(k as f64 + 0.3)).collect(),
        );
        assert_eq!(
            evaluate(&t, &XZState::maximally_mixed(), &settings).unwrap(),
            0.0
        );
    }

    #[test]
    fn evaluate_dimension_mismatch() {
        let t = catalog_chsh();
        let settings = SettingsVector::new(vec![Angle::from_radians(0.0)], vec![]);
        assert!(matches!(
            evaluate(&t, &XZState::singlet(), &settings),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn evaluate_is_linear_in_the_state() {
        let t = catalog_i3322();
        let s1 = measured_state();
        let s2 = XZState::maximally_mixed();
        let lambda = 0.37;
        let mixed = {
            let c1 = s1.coefficients();
            let c2 = s2.coefficients();
            let m: Vec<f64> = c1
                .iter()
                .zip(&c2)
                .map(|(&x, &y)| lambda * x + (1.0 - lambda) * y)
                .collect();
            XZState::new(m[0], m[1], m[2], m[3], m[4], m[5], m[6], m[7]).unwrap()
        };
        let settings = SettingsVector::new(
            (0..3).map(|k| Angle::from_radians(0.5 * k as f64)).collect(),
            (0..3).map(|k| Angle::from_radians(0.7 * k as f64 + 3.0)).collect(),
        );
        let v1 = evaluate(&t, &s1, &settings).unwrap();
        let v2 = evaluate(&t, &s2, &settings).unwrap();
        let vm = evaluate(&t, &mixed, &settings).unwrap();
        assert_abs_diff_eq!(vm, lambda * v1 + (1.0 - lambda) * v2, epsilon = 1e-12);
    }

    #[test]
    fn deterministic_strategies_never_exceed_local_bound() {
        // a deterministic strategy embeds as a product state with unit
        // marginal vectors along z and diagonal correlations a_i * b_j;
        // equivalently, evaluate the strategy value directly
        let t = catalog_i3322();
        let n = t.n();
        let bound = local_bound_bruteforce(&t).unwrap();
        for mask in 0u32..(1 << (2 * n)) {
            let a: Vec<f64> = (0..n)
                .map(|i| if mask & (1 << i) != 0 { 1.0 } else { -1.0 })
                .collect();
            let b: Vec<f64> = (0..n)
                .map(|j| if mask & (1 << (n + j)) != 0 { 1.0 } else { -1.0 })
                .collect();
            let mut v = 0.0;
            for i in 0..n {
                v += t.alice_marginals()[i] * a[i];
            }
            for j in 0..n {
                v += t.bob_marginals()[j] * b[j];
            }
            for i in 0..n {
                for j in 0..n {
                    v += t.joint_coeffs()[i][j] * a[i] * b[j];
                }
            }
            assert!(v <= bound + 1e-12);
        }
    }

    #[test]
    fn noise_tolerance_values() {
        // observed values from a multi-setting photon experiment
        assert_abs_diff_eq!(noise_tolerance(2.0, 2.731).unwrap(), 0.2676, epsilon = 5e-4);
        assert_abs_diff_eq!(noise_tolerance(4.0, 4.592).unwrap(), 0.1289, epsilon = 5e-4);
        assert_eq!(noise_tolerance(2.0, 2.0).unwrap(), 0.0);
        assert_eq!(noise_tolerance(2.0, 1.5).unwrap(), 0.0);
        assert!(noise_tolerance(2.0, 0.0).is_err());
        assert!(noise_tolerance(2.0, -1.0).is_err());
    }

    #[test]
    fn parse_references() {
        assert_eq!(parse_reference("chained:5").unwrap().n(), 5);
        assert!(parse_reference("chained:x").is_err());
        assert!(parse_reference("chained:1").is_err());
        assert!(parse_reference("nope").is_err());
    }

    #[test]
    fn table_serde_round_trip() {
        let t = catalog_i3322();
        let json = serde_json::to_string(&t).unwrap();
        assert!(json.contains("\"n\":3"));
        let back: InequalityTable = serde_json::from_str(&json).unwrap();
        assert_eq!(t, back);

        let bad = json.replace("\"n\":3", "\"n\":4");
        assert!(serde_json::from_str::<InequalityTable>(&bad).is_err());
    }
}
