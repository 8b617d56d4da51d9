//! Dense two-phase simplex for the small LPs in this module.
//!
//! Solves `maximize c'x  s.t.  A x <= b, x >= 0` with `b` of any sign.
//! Phase 1 drives artificial variables out of the basis; Bland's rule keeps
//! the iteration from cycling. Problem sizes here are tiny (tens of
//! variables, a few hundred constraints), so a dense tableau is the right
//! tool.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-7;

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, Clone)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: usize,
    cols: usize, // structural + slack + artificial
    data: Vec<Vec<f64>>, // rows x (cols + 1), last column is rhs
    obj: Vec<f64>,       // cols + 1, last entry is the objective value
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let factor = self.data[row][col];
        for v in self.data[row].iter_mut() {
            *v /= factor;
        }
        for r in 0..self.rows {
            if r != row {
                let f = self.data[r][col];
                if f != 0.0 {
                    for j in 0..=self.cols {
                        self.data[r][j] -= f * self.data[row][j];
                    }
                }
            }
        }
        let f = self.obj[col];
        if f != 0.0 {
            for j in 0..=self.cols {
                self.obj[j] -= f * self.data[row][j];
            }
        }
        self.basis[row] = col;
    }

    /// Bland's rule: entering = lowest-index column with positive reduced
    /// cost; leaving = lowest-index basic variable among minimum ratios.
    fn run(&mut self, max_pivots: usize) -> Result<bool> {
        for _ in 0..max_pivots {
            let Some(col) = (0..self.cols).find(|&j| self.obj[j] > PIVOT_TOL) else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let a = self.data[r][col];
                if a > PIVOT_TOL {
                    let ratio = self.data[r][self.cols] / a;
                    let better = match leave {
                        None => true,
                        Some((lr, lratio)) => {
                            ratio < lratio - PIVOT_TOL
                                || (ratio < lratio + PIVOT_TOL && self.basis[r] < self.basis[lr])
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            match leave {
                Some((row, _)) => self.pivot(row, col),
                None => return Ok(false), // unbounded direction
            }
        }
        Err(Error::Indeterminate("simplex exceeded its pivot budget".into()))
    }
}

/// Maximize `c'x` subject to `a[i] . x <= b[i]` and `x >= 0`.
pub fn maximize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<LpOutcome> {
    let n = c.len();
    let m = a.len();
    if b.len() != m || a.iter().any(|row| row.len() != n) {
        return Err(Error::Config("inconsistent LP dimensions".into()));
    }
    for row in a {
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("non-finite LP coefficient".into()));
        }
    }

    // Columns: n structural, m slacks, then artificials for rows with b < 0.
    let art_rows: Vec<usize> = (0..m).filter(|&i| b[i] < 0.0).collect();
    let cols = n + m + art_rows.len();
    let mut data = vec![vec![0.0; cols + 1]; m];
    let mut basis = vec![0usize; m];
    let mut art_col = n + m;
    for i in 0..m {
        let negate = b[i] < 0.0;
        let sign = if negate { -1.0 } else { 1.0 };
        for j in 0..n {
            data[i][j] = sign * a[i][j];
        }
        data[i][n + i] = sign; // slack
        data[i][cols] = sign * b[i];
        if negate {
            data[i][art_col] = 1.0;
            basis[i] = art_col;
            art_col += 1;
        } else {
            basis[i] = n + i;
        }
    }

    let max_pivots = 50 * (m + cols).max(200);
    let mut t = Tableau { rows: m, cols, data, obj: vec![0.0; cols + 1], basis };

    // Phase 1: maximize -sum(artificials).
    if !art_rows.is_empty() {
        for j in n + m..cols {
            t.obj[j] = -1.0;
        }
        // Express the objective in terms of nonbasic variables.
        for r in 0..m {
            if t.basis[r] >= n + m {
                for j in 0..=cols {
                    t.obj[j] += t.data[r][j];
                }
            }
        }
        t.run(max_pivots)?;
        // The objective row's rhs cell accumulates the negated objective
        // value, i.e. the artificial-variable sum; positive means infeasible.
        if t.obj[cols] > FEAS_TOL {
            return Ok(LpOutcome::Infeasible);
        }
        // Drive any remaining artificial out of the basis.
        for r in 0..m {
            if t.basis[r] >= n + m {
                if let Some(col) = (0..n + m).find(|&j| t.data[r][j].abs() > PIVOT_TOL) {
                    t.pivot(r, col);
                }
                // Otherwise the row is redundant; its rhs is ~0 and it can stay.
            }
        }
    }

    // Phase 2: the real objective.
    t.obj = vec![0.0; cols + 1];
    for j in 0..n {
        t.obj[j] = c[j];
    }
    for j in n + m..cols {
        t.obj[j] = f64::NEG_INFINITY; // artificials must never re-enter
    }
    for r in 0..m {
        let bv = t.basis[r];
        if bv < n && c[bv] != 0.0 {
            let f = c[bv];
            for j in 0..=cols {
                t.obj[j] -= f * t.data[r][j];
            }
        }
    }
    // NEG_INFINITY entries break arithmetic in pivots; replace by a large
    // negative reduced cost instead.
    for j in n + m..cols {
        if t.obj[j] == f64::NEG_INFINITY {
            t.obj[j] = -1e30;
        }
    }

    let optimal = t.run(max_pivots)?;
    if !optimal {
        return Ok(LpOutcome::Unbounded);
    }

    let mut x = vec![0.0; n];
    for r in 0..m {
        if t.basis[r] < n {
            x[t.basis[r]] = t.data[r][t.cols];
        }
    }
    let objective = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    Ok(LpOutcome::Optimal(LpSolution { x, objective }))
}

/// Feasibility of `A x <= b, x >= 0`: a zero-objective solve.
pub fn feasible_point(a: &[Vec<f64>], b: &[f64]) -> Result<Option<Vec<f64>>> {
    let n = a.first().map_or(0, |r| r.len());
    match maximize(&vec![0.0; n], a, b)? {
        LpOutcome::Optimal(sol) => Ok(Some(sol.x)),
        LpOutcome::Infeasible => Ok(None),
        LpOutcome::Unbounded => Err(Error::Indeterminate(
            "feasibility solve reported unbounded".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn simple_maximization() {
        // max 3x + 2y s.t. x + y <= 4, x + 3y <= 6 -> x=4, y=0, obj=12.
        let out = maximize(&[3.0, 2.0], &[vec![1.0, 1.0], vec![1.0, 3.0]], &[4.0, 6.0]).unwrap();
        match out {
            LpOutcome::Optimal(sol) => {
                assert_relative_eq!(sol.objective, 12.0, epsilon = 1e-9);
                assert_relative_eq!(sol.x[0], 4.0, epsilon = 1e-9);
            }
            other => panic!("unexpected outcome {other:?}"),
        }
    }

    #[test]
    fn negative_rhs_requires_phase_one() {
        // x >= 2 encoded as -x <= -2, maximize -x -> x = 2.
        let out = maximize(&[-1.0], &[vec![-1.0]], &[-2.0]).unwrap();
        match out {
            LpOutcome::Optimal(sol) => assert_relative_eq!(sol.x[0], 2.0, epsilon = 1e-9),
            other => panic!("unexpected outcome {other:?}"),
        }
    }

    #[test]
    fn detects_infeasibility() {
        // x <= 1 and x >= 3.
        let out = maximize(&[1.0], &[vec![1.0], vec![-1.0]], &[1.0, -3.0]).unwrap();
        assert!(matches!(out, LpOutcome::Infeasible));
    }

    #[test]
    fn detects_unboundedness() {
        let out = maximize(&[1.0], &[vec![-1.0]], &[0.0]).unwrap();
        assert!(matches!(out, LpOutcome::Unbounded));
    }

    #[test]
    fn feasibility_of_difference_constraints() {
        // u1 - u2 <= -1, u2 - u1 <= -1 is infeasible.
        let a = vec![vec![1.0, -1.0], vec![-1.0, 1.0]];
        assert!(feasible_point(&a, &[-1.0, -1.0]).unwrap().is_none());
        // u1 - u2 <= -1, u2 - u1 <= 3 is feasible.
        assert!(feasible_point(&a, &[-1.0, 3.0]).unwrap().is_some());
    }
}
