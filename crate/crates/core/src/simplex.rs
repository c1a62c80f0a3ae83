//! Dense two-phase simplex for small equality-constrained linear programs.
//!
//! Solves `maximize c.x subject to A x = b, x >= 0`. The behavior polytopes
//! handled here stay below ~150 variables and ~100 constraints, so a dense
//! tableau with partial anti-cycling (Dantzig pricing, falling back to
//! Bland's rule) is plenty.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const FEASIBILITY_TOL: f64 = 1e-7;
const MAX_ITERATIONS: usize = 100_000;
/// Iterations of Dantzig pricing before switching to Bland's rule.
const BLAND_AFTER: usize = 2_000;

/// An equality-constrained LP in standard form.
#[derive(Debug, Clone, Default)]
pub struct LpProblem {
    pub num_vars: usize,
    /// Objective coefficients, maximized.
    pub objective: Vec<f64>,
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub value: f64,
    /// The optimizing point, for feasibility inspection by callers.
    pub x: Vec<f64>,
}

impl LpProblem {
    pub fn new(num_vars: usize) -> Self {
        LpProblem {
            num_vars,
            objective: vec![0.0; num_vars],
            rows: Vec::new(),
            rhs: Vec::new(),
        }
    }

    pub fn set_objective(&mut self, coeffs: Vec<f64>) {
        assert_eq!(coeffs.len(), self.num_vars);
        self.objective = coeffs;
    }

    pub fn add_equality(&mut self, coeffs: Vec<f64>, rhs: f64) {
        assert_eq!(coeffs.len(), self.num_vars);
        self.rows.push(coeffs);
        self.rhs.push(rhs);
    }

    pub fn num_constraints(&self) -> usize {
        self.rows.len()
    }

    /// Two-phase simplex. Infeasibility and unboundedness are reported as
    /// distinct errors; the optimum is accurate to well below 1e-7 for the
    /// small integer-data programs this crate builds.
    pub fn maximize(&self) -> Result<LpSolution> {
        let n = self.num_vars;
        let m = self.rows.len();
        let total = n + m; // structural + artificial columns

        // tableau rows: m constraint rows, columns 0..total plus rhs
        let mut tab: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut basis: Vec<usize> = Vec::with_capacity(m);
        for (r, row) in self.rows.iter().enumerate() {
            let mut t = vec![0.0; total + 1];
            let flip = if self.rhs[r] < 0.0 { -1.0 } else { 1.0 };
            for (j, &a) in row.iter().enumerate() {
                t[j] = flip * a;
            }
            t[n + r] = 1.0;
            t[total] = flip * self.rhs[r];
            tab.push(t);
            basis.push(n + r);
        }

        // phase 1: maximize -(sum of artificials); the reduced-cost row
        // starts at -c = +1 on artificial columns and is priced out against
        // the (artificial) starting basis
        let mut phase1 = vec![0.0; total + 1];
        for j in n..total {
            phase1[j] = 1.0;
        }
        for r in 0..m {
            for j in 0..=total {
                phase1[j] -= tab[r][j];
            }
        }
        run_simplex(&mut tab, &mut phase1, &mut basis, total, true)?;
        // the rhs cell of the objective row tracks -(remaining artificial sum)
        if phase1[total] < -FEASIBILITY_TOL {
            return Err(Error::LpInfeasible);
        }
        drive_out_artificials(&mut tab, &mut basis, n, total);

        // phase 2 on the structural columns only
        let mut obj = vec![0.0; total + 1];
        for j in 0..n {
            obj[j] = -self.objective[j]; // reduced-cost row of the maximization
        }
        for r in 0..m {
            let b = basis[r];
            if b < n && obj[b].abs() > 0.0 {
                let factor = obj[b];
                for j in 0..=total {
                    obj[j] -= factor * tab[r][j];
                }
            }
        }
        run_simplex(&mut tab, &mut obj, &mut basis, n, false)?;

        let mut x = vec![0.0; n];
        for r in 0..m {
            if basis[r] < n {
                x[basis[r]] = tab[r][total];
            }
        }
        let value = self.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        Ok(LpSolution { value, x })
    }
}

/// Pivot until no entering column improves the objective row. `limit` is the
/// last allowed entering column (artificials are frozen out in phase 2).
fn run_simplex(
    tab: &mut [Vec<f64>],
    obj: &mut [f64],
    basis: &mut [usize],
    limit: usize,
    phase1: bool,
) -> Result<()> {
    let m = tab.len();
    let total = obj.len() - 1;
    for iter in 0..MAX_ITERATIONS {
        let bland = iter >= BLAND_AFTER;
        // entering column: negative reduced cost in the maximization row
        let mut entering = None;
        let mut best = -PIVOT_TOL;
        for (j, &c) in obj.iter().enumerate().take(limit) {
            if c < best {
                entering = Some(j);
                if bland {
                    break;
                }
                best = c;
            }
        }
        let Some(col) = entering else {
            return Ok(());
        };

        // ratio test, ties broken by smaller basic-variable index
        let mut leaving: Option<usize> = None;
        let mut best_ratio = f64::INFINITY;
        for r in 0..m {
            let a = tab[r][col];
            if a > PIVOT_TOL {
                let ratio = tab[r][total] / a;
                let tie = (ratio - best_ratio).abs() <= 1e-12;
                if ratio < best_ratio - 1e-12
                    || (tie && leaving.map_or(true, |lr| basis[r] < basis[lr]))
                {
                    best_ratio = ratio;
                    leaving = Some(r);
                }
            }
        }
        let Some(row) = leaving else {
            return if phase1 {
                Err(Error::LpNumerical("phase 1 unbounded".into()))
            } else {
                Err(Error::LpUnbounded)
            };
        };

        pivot(tab, obj, row, col);
        basis[row] = col;
    }
    Err(Error::LpNumerical(format!(
        "no convergence within {MAX_ITERATIONS} pivots"
    )))
}

fn pivot(tab: &mut [Vec<f64>], obj: &mut [f64], row: usize, col: usize) {
    let total = obj.len() - 1;
    let p = tab[row][col];
    for j in 0..=total {
        tab[row][j] /= p;
    }
    tab[row][col] = 1.0;
    for r in 0..tab.len() {
        if r != row {
            let f = tab[r][col];
            if f != 0.0 {
                for j in 0..=total {
                    tab[r][j] -= f * tab[row][j];
                }
                tab[r][col] = 0.0;
            }
        }
    }
    let f = obj[col];
    if f != 0.0 {
        for j in 0..=total {
            obj[j] -= f * tab[row][j];
        }
        obj[col] = 0.0;
    }
}

/// Replace artificial basic variables with structural ones where possible;
/// rows that cannot be pivoted are redundant (zero row) and harmless.
fn drive_out_artificials(tab: &mut [Vec<f64>], basis: &mut [usize], n: usize, total: usize) {
    let m = tab.len();
    for r in 0..m {
        if basis[r] >= n {
            if let Some(col) = (0..n).find(|&j| tab[r][j].abs() > PIVOT_TOL) {
                let mut dummy = vec![0.0; total + 1];
                pivot(tab, &mut dummy, r, col);
                basis[r] = col;
            }
        }
    }
}
