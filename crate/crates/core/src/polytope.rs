//! Linear programming over the no-signaling polytope: maximal Bell values
//! and maximal marginal probabilities compatible with an observed violation.
//!
//! Behaviors are the joint outcome distributions `p(a, b | x, y)` for binary
//! outcomes and N settings per side, constrained by normalization,
//! non-negativity and no-signaling (each party's marginal independent of the
//! other party's setting).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inequality::InequalityTable;
use crate::simplex::{LpProblem, LpSolution};

/// Signaling / normalization residual accepted when checking a behavior.
pub const BEHAVIOR_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Party {
    Alice,
    Bob,
}

/// Outcome label for marginal-probability objectives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Plus,
    Minus,
}

/// The no-signaling behavior space for an N-setting binary-outcome scenario,
/// with the Bell expression of a given table attached.
pub struct BehaviorLp {
    n: usize,
    bell: Vec<f64>,
    problem_rows: Vec<(Vec<f64>, f64)>,
}

fn outcome_sign(a: usize) -> f64 {
    if a == 0 {
        1.0
    } else {
        -1.0
    }
}

impl BehaviorLp {
    /// Variable layout: `p(a, b | x, y)` at index `((x * n + y) * 2 + a) * 2 + b`,
    /// outcomes 0 = +1, 1 = -1.
    pub fn index(&self, x: usize, y: usize, a: usize, b: usize) -> usize {
        ((x * self.n + y) * 2 + a) * 2 + b
    }

    pub fn num_vars(&self) -> usize {
        4 * self.n * self.n
    }

    pub fn new(table: &InequalityTable) -> Self {
        let n = table.n();
        let mut lp = BehaviorLp {
            n,
            bell: Vec::new(),
            problem_rows: Vec::new(),
        };
        let nv = lp.num_vars();

        // normalization, one per setting pair
        for x in 0..n {
            for y in 0..n {
                let mut row = vec![0.0; nv];
                for a in 0..2 {
                    for b in 0..2 {
                        row[lp.index(x, y, a, b)] = 1.0;
                    }
                }
                lp.problem_rows.push((row, 1.0));
            }
        }
        // no-signaling: p_A(+|x) independent of y, p_B(+|y) independent of x
        // (the "-" outcome follows from normalization)
        for x in 0..n {
            for y in 1..n {
                let mut row = vec![0.0; nv];
                for b in 0..2 {
                    row[lp.index(x, 0, 0, b)] += 1.0;
                    row[lp.index(x, y, 0, b)] -= 1.0;
                }
                lp.problem_rows.push((row, 0.0));
            }
        }
        for y in 0..n {
            for x in 1..n {
                let mut row = vec![0.0; nv];
                for a in 0..2 {
                    row[lp.index(0, y, a, 0)] += 1.0;
                    row[lp.index(x, y, a, 0)] -= 1.0;
                }
                lp.problem_rows.push((row, 0.0));
            }
        }

        // Bell expression as a linear functional of the behavior; marginal
        // terms are read off the y = 0 (resp. x = 0) blocks, which
        // no-signaling makes representative
        let mut bell = vec![0.0; nv];
        for x in 0..n {
            for y in 0..n {
                let l = table.joint_coeffs()[x][y];
                if l != 0.0 {
                    for a in 0..2 {
                        for b in 0..2 {
                            bell[lp.index(x, y, a, b)] +=
                                l * outcome_sign(a) * outcome_sign(b);
                        }
                    }
                }
            }
        }
        for x in 0..n {
            let c = table.alice_marginals()[x];
            if c != 0.0 {
                for a in 0..2 {
                    for b in 0..2 {
                        bell[lp.index(x, 0, a, b)] += c * outcome_sign(a);
                    }
                }
            }
        }
        for y in 0..n {
            let c = table.bob_marginals()[y];
            if c != 0.0 {
                for a in 0..2 {
                    for b in 0..2 {
                        bell[lp.index(0, y, a, b)] += c * outcome_sign(b);
                    }
                }
            }
        }
        lp.bell = bell;
        lp
    }

    fn base_problem(&self) -> LpProblem {
        let mut lp = LpProblem::new(self.num_vars());
        for (row, rhs) in &self.problem_rows {
            lp.add_equality(row.clone(), *rhs);
        }
        lp
    }

    /// Maximize the Bell expression over the polytope.
    pub fn maximize_bell(&self) -> Result<LpSolution> {
        let mut lp = self.base_problem();
        lp.set_objective(self.bell.clone());
        lp.maximize()
    }

    /// Maximize one marginal probability subject to the Bell expression
    /// pinned to `observed` (or lower-bounded by it with `at_least`).
    pub fn maximize_marginal(
        &self,
        party: Party,
        setting: usize,
        outcome: Outcome,
        observed: f64,
        at_least: bool,
    ) -> Result<LpSolution> {
        if setting >= self.n {
            return Err(Error::InvalidArgument(format!(
                "setting index {setting} out of range for N = {}",
                self.n
            )));
        }
        let mut lp = self.base_problem();
        if at_least {
            // slack turns `bell >= observed` into an equality; the slack is
            // bounded above by ns_max - observed through the polytope itself
            let nv = self.num_vars();
            let mut lp2 = LpProblem::new(nv + 1);
            for (row, rhs) in &self.problem_rows {
                let mut r = row.clone();
                r.push(0.0);
                lp2.add_equality(r, *rhs);
            }
            let mut bell_row: Vec<f64> = self.bell.clone();
            bell_row.push(-1.0);
            lp2.add_equality(bell_row, observed);
            let mut obj = self.marginal_objective(party, setting, outcome);
            obj.push(0.0);
            lp2.set_objective(obj);
            return lp2.maximize();
        }
        lp.add_equality(self.bell.clone(), observed);
        lp.set_objective(self.marginal_objective(party, setting, outcome));
        lp.maximize()
    }

    fn marginal_objective(&self, party: Party, setting: usize, outcome: Outcome) -> Vec<f64> {
        let mut obj = vec![0.0; self.num_vars()];
        let o = match outcome {
            Outcome::Plus => 0,
            Outcome::Minus => 1,
        };
        match party {
            Party::Alice => {
                for b in 0..2 {
                    obj[self.index(setting, 0, o, b)] = 1.0;
                }
            }
            Party::Bob => {
                for a in 0..2 {
                    obj[self.index(0, setting, a, o)] = 1.0;
                }
            }
        }
        obj
    }

    /// Check a returned behavior against the polytope's defining inequalities.
    pub fn is_feasible(&self, x: &[f64]) -> bool {
        if x.len() != self.num_vars() {
            return false;
        }
        if x.iter().any(|&p| !(-BEHAVIOR_TOL..=1.0 + BEHAVIOR_TOL).contains(&p)) {
            return false;
        }
        self.problem_rows.iter().all(|(row, rhs)| {
            let lhs: f64 = row.iter().zip(x).map(|(r, v)| r * v).sum();
            (lhs - rhs).abs() <= BEHAVIOR_TOL
        })
    }
}

/// Maximum of the Bell expression over all no-signaling behaviors.
pub fn ns_max(table: &InequalityTable) -> Result<f64> {
    Ok(BehaviorLp::new(table).maximize_bell()?.value)
}

/// Largest probability `P(outcome | setting)` for `party` among no-signaling
/// behaviors whose Bell value equals `observed`.
///
/// Values below the local bound certify nothing and return 1 by convention;
/// values above the no-signaling maximum are rejected.
pub fn ns_marginal_bound(
    table: &InequalityTable,
    observed: f64,
    party: Party,
    setting: usize,
    outcome: Outcome,
) -> Result<f64> {
    let lp = BehaviorLp::new(table);
    let max = lp.maximize_bell()?.value;
    if observed > max + 1e-9 {
        return Err(Error::AboveNoSignalingMax {
            observed,
            ns_max: max,
        });
    }
    if observed < table.local_bound() {
        return Ok(1.0);
    }
    let sol = lp.maximize_marginal(party, setting, outcome, observed.min(max), false)?;
    Ok(sol.value)
}

/// [`ns_marginal_bound`] maximized over every (party, setting, outcome)
/// choice, the quantity reported by the randomness analysis.
pub fn ns_marginal_bound_max(table: &InequalityTable, observed: f64) -> Result<f64> {
    let lp = BehaviorLp::new(table);
    let max = lp.maximize_bell()?.value;
    if observed > max + 1e-9 {
        return Err(Error::AboveNoSignalingMax {
            observed,
            ns_max: max,
        });
    }
    if observed < table.local_bound() {
        return Ok(1.0);
    }
    let pinned = observed.min(max);
    let mut best = f64::NEG_INFINITY;
    for party in [Party::Alice, Party::Bob] {
        for setting in 0..table.n() {
            for outcome in [Outcome::Plus, Outcome::Minus] {
                let sol = lp.maximize_marginal(party, setting, outcome, pinned, false)?;
                best = best.max(sol.value);
            }
        }
    }
    Ok(best)
}

/// Largest marginal probability among quantum correlations compatible with a
/// CHSH value `s`, the analytic curve `1/2 + sqrt(2 - s^2/4) / 2`.
pub fn quantum_marginal_bound_chsh(s: f64) -> Result<f64> {
    let max = 2.0 * 2.0_f64.sqrt();
    if !(2.0 - 1e-9..=max + 1e-9).contains(&s) {
        return Err(Error::InvalidArgument(format!(
            "CHSH value {s} outside [2, 2*sqrt(2)]"
        )));
    }
    let s = s.clamp(2.0, max);
    Ok(0.5 + 0.5 * (2.0 - s * s / 4.0).max(0.0).sqrt())
}
