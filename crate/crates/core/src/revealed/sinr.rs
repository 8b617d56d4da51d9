//! SINR quadratic forms and the monotonicity certificate for SINR budgets.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

/// `SINR(alpha, beta) = beta' Q beta / (beta' P(alpha) beta + gamma)` with
/// `P(alpha)` already built. Zero at `beta = 0`.
pub fn sinr_value(q: &DMatrix<f64>, p_alpha: &DMatrix<f64>, gamma: f64, beta: &DVector<f64>) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::Validation(format!("gamma must be > 0, got {gamma}")));
    }
    let m = beta.len();
    if q.nrows() != m || q.ncols() != m || p_alpha.nrows() != m || p_alpha.ncols() != m {
        return Err(Error::Config("Q and P(alpha) must be m x m for beta of length m".into()));
    }
    let signal = beta.dot(&(q * beta));
    let interference = beta.dot(&(p_alpha * beta));
    Ok(signal / (interference + gamma))
}

/// How strictly the componentwise condition on `(c/d) P - Q` is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Strictness {
    /// Every entry strictly negative. Note that this excludes diagonal
    /// `P(alpha)` outright: off-diagonal zeros fail a strict comparison.
    Verbatim,
    /// Off-diagonal entries may be zero; diagonal entries must be strictly
    /// negative. Certifies the diagonal case, where monotonicity still holds.
    RelaxedOffDiagonal,
}

/// Outcome of the sufficient-condition check. The conditions are sufficient,
/// not necessary, so the negative verdict is "not certified" rather than
/// "not monotone".
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum MonotonicityVerdict {
    Monotone,
    NotCertified { reason: String },
}

impl MonotonicityVerdict {
    pub fn is_monotone(&self) -> bool {
        matches!(self, MonotonicityVerdict::Monotone)
    }
}

const OFFDIAG_TOL: f64 = 1e-12;

/// Sufficient conditions for `SINR(alpha_n, .)` to be componentwise
/// nondecreasing in `beta > 0` (equivalently for the budget
/// `g_n = SINR - delta` to be monotone increasing):
///
/// 1. `Q` is diagonal;
/// 2. for every `n`, with `c = lambda_min(P(alpha_n))` and
///    `d = lambda_max(Q)`, every entry of `(c/d) P(alpha_n) - Q` is negative.
///
/// Sketch: `d SINR / d beta_i >= 0` reduces to
/// `(Q beta)_i (beta'P beta + gamma) >= (beta'Q beta) (P beta)_i`; the
/// conditions bound the right side through `(P beta)_i <= (d/c)(Q beta)_i`,
/// which settles the comparison wherever the noise power `gamma` carries the
/// denominator — a ball around the origin of squared radius at least
/// `c * gamma / (d^2 - c^2)` (all of `beta > 0` when `c >= d`). SINR budget
/// sets live at the scale `beta'(Q - delta P) beta = delta * gamma`, inside
/// that region for the thresholds used here; far outside it the SINR tends
/// to the scale-free Rayleigh quotient, which no componentwise condition can
/// order globally.
pub fn sinr_monotonicity_check(
    q: &DMatrix<f64>,
    p_alphas: &[DMatrix<f64>],
    strictness: Strictness,
) -> Result<MonotonicityVerdict> {
    let m = q.nrows();
    if q.ncols() != m {
        return Err(Error::Config("Q must be square".into()));
    }
    for i in 0..m {
        for j in 0..m {
            if i != j && q[(i, j)].abs() >= OFFDIAG_TOL {
                return Ok(MonotonicityVerdict::NotCertified {
                    reason: format!("condition 1: Q[{i},{j}] = {} is not zero", q[(i, j)]),
                });
            }
        }
    }
    let d = q.clone().symmetric_eigen().eigenvalues.max();
    if !(d > 0.0) {
        return Ok(MonotonicityVerdict::NotCertified {
            reason: "condition 2: Q has no positive eigenvalue".into(),
        });
    }
    for (n, p) in p_alphas.iter().enumerate() {
        if p.nrows() != m || p.ncols() != m {
            return Err(Error::Config(format!("P(alpha_{n}) has wrong dimensions")));
        }
        let c = p.clone().symmetric_eigen().eigenvalues.min();
        if !(c > 0.0) {
            return Ok(MonotonicityVerdict::NotCertified {
                reason: format!("condition 2: P(alpha_{n}) is not positive definite"),
            });
        }
        let mat = p * (c / d) - q;
        for i in 0..m {
            for j in 0..m {
                let v = mat[(i, j)];
                let ok = match strictness {
                    Strictness::Verbatim => v < 0.0,
                    Strictness::RelaxedOffDiagonal => {
                        if i == j {
                            v < 0.0
                        } else {
                            v <= 0.0
                        }
                    }
                };
                if !ok {
                    return Ok(MonotonicityVerdict::NotCertified {
                        reason: format!(
                            "condition 2: entry ({i},{j}) of (c/d)P(alpha_{n}) - Q is {v:.6} (not < 0)"
                        ),
                    });
                }
            }
        }
    }
    Ok(MonotonicityVerdict::Monotone)
}
