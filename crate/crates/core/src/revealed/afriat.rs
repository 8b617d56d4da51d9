//! Afriat feasibility and utility reconstruction.
//!
//! Rationalizability is decided directly as feasibility of the inequality
//! system
//!
//! ```text
//! u_s - u_t - lambda_t * slack_t(beta_s) <= 0   for all t, s
//! lambda_t >= 1
//! ```
//!
//! (`slack_t` as in [`RPDataset::afriat_slack`]). The `lambda >= 1`
//! normalization is lossless: the system is invariant under positive scaling
//! of `(u, lambda)` and under shifting `u`, so any solution with positive
//! `lambda` rescales into this form. Feasibility goes through the dense
//! simplex; this route is kept independent of the combinatorial GARP test so
//! the two can cross-check each other. Given feasible multipliers, the `u`
//! values are re-derived as shortest-path potentials (Bellman–Ford) to drive
//! the certificate residual to rounding level.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};

use super::simplex::{self};
use super::RPDataset;

/// Residual bound a certificate must satisfy.
pub const CERT_TOL: f64 = 1e-9;

/// Positive reals `(u_t, lambda_t)` witnessing utility maximization.
#[derive(Debug, Clone, Serialize)]
pub struct AfriatCertificate {
    pub u: Vec<f64>,
    pub lambda: Vec<f64>,
}

impl AfriatCertificate {
    /// `max_{t != s} [u_s - u_t - lambda_t * slack_t(beta_s)]`; feasible
    /// certificates are <= [`CERT_TOL`].
    pub fn residual(&self, ds: &RPDataset) -> Result<f64> {
        let n = ds.len();
        if self.u.len() != n || self.lambda.len() != n {
            return Err(Error::Validation("certificate length does not match dataset".into()));
        }
        let mut worst = f64::NEG_INFINITY;
        for t in 0..n {
            for s in 0..n {
                if t == s {
                    continue;
                }
                let slack = ds.afriat_slack(t, &ds.responses()[s])?;
                worst = worst.max(self.u[s] - self.u[t] - self.lambda[t] * slack);
            }
        }
        Ok(if worst.is_finite() { worst } else { 0.0 })
    }
}

#[derive(Debug, Clone)]
pub enum RationalityVerdict {
    Rational(AfriatCertificate),
    Irrational,
}

impl RationalityVerdict {
    pub fn is_rational(&self) -> bool {
        matches!(self, RationalityVerdict::Rational(_))
    }
}

/// Re-derive `u` for fixed `lambda` as shortest-path potentials over edge
/// weights `w(t -> s) = lambda_t * slack_t(beta_s)`. Returns `None` on a
/// negative cycle (the multipliers are not actually feasible).
fn potentials(slack: &[Vec<f64>], lambda: &[f64]) -> Option<Vec<f64>> {
    let n = lambda.len();
    let mut u = vec![0.0f64; n];
    for round in 0..n {
        let mut changed = false;
        for t in 0..n {
            for s in 0..n {
                if t == s {
                    continue;
                }
                let cand = u[t] + lambda[t] * slack[t][s];
                if cand < u[s] - 1e-15 {
                    u[s] = cand;
                    changed = true;
                }
            }
        }
        if !changed {
            return Some(u);
        }
        if round == n - 1 {
            return None;
        }
    }
    Some(u)
}

/// Decide feasibility of the Afriat inequalities. Returns a certificate on
/// success; solver trouble surfaces as an error, never as a silent verdict.
pub fn afriat_feasibility(ds: &RPDataset) -> Result<RationalityVerdict> {
    let n = ds.len();
    let mut slack = vec![vec![0.0f64; n]; n];
    for t in 0..n {
        for s in 0..n {
            slack[t][s] = ds.afriat_slack(t, &ds.responses()[s])?;
        }
    }
    if n == 1 {
        return Ok(RationalityVerdict::Rational(AfriatCertificate { u: vec![1.0], lambda: vec![1.0] }));
    }

    // Variables: [u_0..u_{n-1}, mu_0..mu_{n-1}] >= 0 with lambda = 1 + mu.
    // Constraint (t, s): u_s - u_t - mu_t * slack <= slack.
    let mut rows = Vec::with_capacity(n * (n - 1));
    let mut rhs = Vec::with_capacity(n * (n - 1));
    for t in 0..n {
        for s in 0..n {
            if t == s {
                continue;
            }
            let mut row = vec![0.0; 2 * n];
            row[s] += 1.0;
            row[t] -= 1.0;
            row[n + t] = -slack[t][s];
            rows.push(row);
            rhs.push(slack[t][s]);
        }
    }

    let Some(x) = simplex::feasible_point(&rows, &rhs)? else {
        return Ok(RationalityVerdict::Irrational);
    };
    let lambda: Vec<f64> = (0..n).map(|t| 1.0 + x[n + t]).collect();

    // Tighten u, then shift positive (the inequalities only see differences).
    let mut u = match potentials(&slack, &lambda) {
        Some(u) => u,
        None => x[..n].to_vec(),
    };
    let min_u = u.iter().cloned().fold(f64::INFINITY, f64::min);
    for v in u.iter_mut() {
        *v += 1.0 - min_u;
    }

    let cert = AfriatCertificate { u, lambda };
    let residual = cert.residual(ds)?;
    if residual > CERT_TOL {
        return Err(Error::Indeterminate(format!(
            "LP reported feasible but the certificate residual is {residual:.3e}"
        )));
    }
    Ok(RationalityVerdict::Rational(cert))
}

/// The reconstructed piecewise (linear or budget-shaped) utility
/// `U(beta) = min_t [u_t + lambda_t * slack_t(beta)]`.
#[derive(Debug, Clone)]
pub struct UtilityEvaluator {
    dataset: RPDataset,
    cert: AfriatCertificate,
}

impl UtilityEvaluator {
    pub fn eval(&self, beta: &DVector<f64>) -> f64 {
        let mut best = f64::INFINITY;
        for t in 0..self.dataset.len() {
            let slack = self
                .dataset
                .afriat_slack(t, beta)
                .expect("slack evaluation cannot fail on a validated dataset");
            best = best.min(self.cert.u[t] + self.cert.lambda[t] * slack);
        }
        best
    }

    pub fn certificate(&self) -> &AfriatCertificate {
        &self.cert
    }
}

/// Build the min-form utility from a feasible certificate. The certificate
/// is re-verified against the dataset before use.
pub fn construct_utility(ds: &RPDataset, cert: &AfriatCertificate) -> Result<UtilityEvaluator> {
    if cert.lambda.iter().any(|l| !(*l > 0.0)) {
        return Err(Error::Validation("certificate multipliers must be strictly positive".into()));
    }
    let residual = cert.residual(ds)?;
    if residual > CERT_TOL {
        return Err(Error::Validation(format!(
            "certificate is infeasible for this dataset (residual {residual:.3e})"
        )));
    }
    Ok(UtilityEvaluator { dataset: ds.clone(), cert: cert.clone() })
}
