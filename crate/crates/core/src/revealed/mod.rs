//! Revealed-preference tests for cognitive behavior.
//!
//! A probe/response dataset `{(alpha_n, beta_n)}` is *rationalizable* when
//! some monotone utility `U` explains every response as a constrained
//! maximizer: `beta_n in argmax { U(beta) : budget_n(beta) <= 0 }`. Afriat's
//! theorem makes this decidable from the data alone: rationalizability is
//! equivalent to feasibility of a finite set of linear inequalities in
//! positive reals `(u_t, lambda_t)`, and equivalent again to GARP (no strict
//! revealed-preference cycles). Feasible `(u_t, lambda_t)` generate the
//! piecewise-linear utility `U(beta) = min_t [u_t + lambda_t slack_t(beta)]`
//! that rationalizes the dataset.
//!
//! Budgets come in three flavors: the classic linear budget
//! `alpha_n' beta <= p_*`, a quadratic-form SINR budget used for waveform
//! responses, and an arbitrary callable budget for the generalized
//! (nonlinear) test. Nonlinear budgets must put every response on the budget
//! boundary (`g_n(beta_n) = 0`), which is validated on dataset construction
//! rather than silently repaired.

mod afriat;
mod beam;
mod garp;
mod simplex;
mod sinr;
mod synth;

pub use afriat::{afriat_feasibility, construct_utility, AfriatCertificate, RationalityVerdict, UtilityEvaluator};
pub use beam::{beam_probe, closed_loop_beam_dataset, BeamScenario};
pub use garp::{garp_check, nonlinear_garp, GarpVerdict};
pub use sinr::{sinr_monotonicity_check, sinr_value, MonotonicityVerdict, Strictness};
pub use synth::{synth_responder, TrueUtility};

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::validate_psd;

/// Absolute tolerance for the boundary condition `g_n(beta_n) = 0` required
/// of nonlinear-budget datasets.
pub const BOUNDARY_TOL: f64 = 1e-6;

/// Interference-power loading `P(alpha)` for the SINR budget.
#[derive(Clone)]
pub enum PBuilder {
    /// `P(alpha) = diag(alpha) + ridge * I`. The default loading
    /// (`ridge = 0.01`) keeps `P` positive definite for any positive probe.
    DiagonalLoading { ridge: f64 },
    /// Diagonal loading plus negative off-diagonal coupling:
    /// `P_ii = alpha_i + 0.01`, `P_ij = -coupling * min(alpha_i, alpha_j)`.
    /// Stays SPD for small `coupling` and can satisfy the
    /// strict-componentwise monotonicity certificate, which a diagonal `P`
    /// cannot.
    NegativeCoupling { coupling: f64 },
    /// Arbitrary SPD-valued map, for in-process experimentation.
    Custom(Arc<dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync>),
}

impl PBuilder {
    pub fn default_loading() -> Self {
        PBuilder::DiagonalLoading { ridge: 0.01 }
    }

    pub fn negative_coupling(coupling: f64) -> Self {
        PBuilder::NegativeCoupling { coupling }
    }

    pub fn build(&self, alpha: &DVector<f64>) -> DMatrix<f64> {
        match self {
            PBuilder::DiagonalLoading { ridge } => {
                DMatrix::from_diagonal(alpha) + DMatrix::identity(alpha.len(), alpha.len()) * *ridge
            }
            PBuilder::NegativeCoupling { coupling } => {
                let m = alpha.len();
                DMatrix::from_fn(m, m, |i, j| {
                    if i == j {
                        alpha[i] + 0.01
                    } else {
                        -coupling * alpha[i].min(alpha[j])
                    }
                })
            }
            PBuilder::Custom(f) => f(alpha),
        }
    }
}

impl fmt::Debug for PBuilder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PBuilder::DiagonalLoading { ridge } => {
                f.debug_struct("DiagonalLoading").field("ridge", ridge).finish()
            }
            PBuilder::NegativeCoupling { coupling } => {
                f.debug_struct("NegativeCoupling").field("coupling", coupling).finish()
            }
            PBuilder::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// The SINR budget: responses must hold
/// `SINR(alpha, beta) = beta'Q beta / (beta'P(alpha) beta + gamma)` at the
/// threshold `delta`. The budget function is `g(beta) = SINR(alpha, beta) -
/// delta`, which is monotone increasing in `beta` under the conditions
/// checked by [`sinr_monotonicity_check`]; `{g <= 0}` is then a lower set
/// with the responses on its boundary.
#[derive(Debug, Clone)]
pub struct SinrBudget {
    pub q: DMatrix<f64>,
    pub p_builder: PBuilder,
    pub gamma: f64,
    pub delta: f64,
}

/// Arbitrary per-observation budget `g(n, beta)`; the caller warrants it is
/// monotone increasing in `beta`.
#[derive(Clone)]
pub struct CallableBudget(pub Arc<dyn Fn(usize, &DVector<f64>) -> f64 + Send + Sync>);

impl fmt::Debug for CallableBudget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CallableBudget(..)")
    }
}

/// Budget specification attached to a dataset.
#[derive(Debug, Clone)]
pub enum BudgetSpec {
    /// `alpha_n' beta <= p_star`. Datasets are canonicalized to `p_star = 1`
    /// on ingestion (probes rescaled), which is lossless because the test
    /// verdicts and the recovered utility are ordinal.
    Linear { p_star: f64 },
    SinrQuadratic(SinrBudget),
    Callable(CallableBudget),
}

impl BudgetSpec {
    pub fn linear() -> Self {
        BudgetSpec::Linear { p_star: 1.0 }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, BudgetSpec::Linear { .. })
    }
}

/// Probe/response dataset with its budget. Probes are componentwise
/// positive, responses componentwise nonnegative.
#[derive(Debug, Clone)]
pub struct RPDataset {
    probes: Vec<DVector<f64>>,
    responses: Vec<DVector<f64>>,
    budget: BudgetSpec,
}

impl RPDataset {
    pub fn new(
        probes: Vec<DVector<f64>>,
        responses: Vec<DVector<f64>>,
        budget: BudgetSpec,
    ) -> Result<Self> {
        if probes.is_empty() || probes.len() != responses.len() {
            return Err(Error::Validation(format!(
                "need N >= 1 probe/response pairs, got {} probes and {} responses",
                probes.len(),
                responses.len()
            )));
        }
        let m = probes[0].len();
        if m == 0 {
            return Err(Error::Validation("probes must be non-empty vectors".into()));
        }
        for (i, (a, b)) in probes.iter().zip(&responses).enumerate() {
            if a.len() != m || b.len() != m {
                return Err(Error::Validation(format!(
                    "pair {i} has inconsistent dimension (expected {m})"
                )));
            }
            if a.iter().any(|v| !(*v > 0.0)) {
                return Err(Error::Validation(format!("probe {i} must be componentwise > 0")));
            }
            if b.iter().any(|v| !(*v >= 0.0)) {
                return Err(Error::Validation(format!(
                    "response {i} must be componentwise >= 0"
                )));
            }
        }

        // Canonicalize and validate the budget.
        let (probes, budget) = match budget {
            BudgetSpec::Linear { p_star } => {
                if !(p_star > 0.0) {
                    return Err(Error::Validation(format!("p_star must be > 0, got {p_star}")));
                }
                let probes = if (p_star - 1.0).abs() > 0.0 {
                    probes.into_iter().map(|a| a / p_star).collect()
                } else {
                    probes
                };
                (probes, BudgetSpec::Linear { p_star: 1.0 })
            }
            BudgetSpec::SinrQuadratic(b) => {
                if !(b.gamma > 0.0) {
                    return Err(Error::Validation(format!("gamma must be > 0, got {}", b.gamma)));
                }
                if !(b.delta > 0.0) {
                    return Err(Error::Validation(format!("delta must be > 0, got {}", b.delta)));
                }
                validate_psd("Q", &b.q)?;
                for (i, alpha) in probes.iter().enumerate() {
                    let p = b.p_builder.build(alpha);
                    if p.clone().cholesky().is_none() {
                        return Err(Error::Validation(format!(
                            "P(alpha_{i}) is not positive definite"
                        )));
                    }
                }
                (probes, BudgetSpec::SinrQuadratic(b))
            }
            other => (probes, other),
        };

        let ds = Self { probes, responses, budget };

        // Nonlinear budgets: every response must sit on its budget boundary.
        if !ds.budget.is_linear() {
            for t in 0..ds.len() {
                let g = ds.budget_value(t, &ds.responses[t])?;
                if g.abs() > BOUNDARY_TOL {
                    return Err(Error::Validation(format!(
                        "response {t} is off its budget boundary (g = {g:.3e}); datasets are \
                         rejected rather than repaired"
                    )));
                }
            }
        }
        Ok(ds)
    }

    pub fn len(&self) -> usize {
        self.probes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probes.is_empty()
    }

    /// Dimension `m` of probes and responses.
    pub fn dim(&self) -> usize {
        self.probes[0].len()
    }

    pub fn probes(&self) -> &[DVector<f64>] {
        &self.probes
    }

    pub fn responses(&self) -> &[DVector<f64>] {
        &self.responses
    }

    pub fn budget(&self) -> &BudgetSpec {
        &self.budget
    }

    /// Budget function `g_t(beta)` of observation `t` evaluated at `beta`.
    pub fn budget_value(&self, t: usize, beta: &DVector<f64>) -> Result<f64> {
        if t >= self.len() {
            return Err(Error::Validation(format!("observation index {t} out of range")));
        }
        match &self.budget {
            BudgetSpec::Linear { p_star } => Ok(self.probes[t].dot(beta) - p_star),
            BudgetSpec::SinrQuadratic(b) => {
                let p = b.p_builder.build(&self.probes[t]);
                Ok(sinr::sinr_value(&b.q, &p, b.gamma, beta)? - b.delta)
            }
            BudgetSpec::Callable(f) => Ok((f.0)(t, beta)),
        }
    }

    /// The slack entering the Afriat inequalities and the reconstructed
    /// utility: `alpha_t'(beta - beta_t)` under a linear budget, `g_t(beta)`
    /// under a nonlinear one (where `g_t(beta_t) = 0` by the boundary
    /// invariant).
    pub fn afriat_slack(&self, t: usize, beta: &DVector<f64>) -> Result<f64> {
        match &self.budget {
            BudgetSpec::Linear { .. } => Ok(self.probes[t].dot(beta) - self.probes[t].dot(&self.responses[t])),
            _ => self.budget_value(t, beta),
        }
    }

    /// CSV with header `n,alpha_1..alpha_m,beta_1..beta_m`, one row per
    /// observation (1-based `n`).
    pub fn to_csv_string(&self) -> String {
        let m = self.dim();
        let mut header = vec!["n".to_string()];
        header.extend((1..=m).map(|i| format!("alpha_{i}")));
        header.extend((1..=m).map(|i| format!("beta_{i}")));
        let mut out = header.join(",");
        out.push('\n');
        for t in 0..self.len() {
            let mut row = vec![(t + 1).to_string()];
            row.extend(self.probes[t].iter().map(|v| v.to_string()));
            row.extend(self.responses[t].iter().map(|v| v.to_string()));
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Parse the CSV schema produced by [`Self::to_csv_string`] and attach a
    /// budget (read separately from its JSON sidecar).
    pub fn from_csv_string(text: &str, budget: BudgetSpec) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let headers = reader.headers()?.clone();
        let cols = headers.len();
        if cols < 3 || (cols - 1) % 2 != 0 {
            return Err(Error::Validation(format!(
                "expected header n,alpha_1..alpha_m,beta_1..beta_m; got {cols} columns"
            )));
        }
        let m = (cols - 1) / 2;
        let mut probes = Vec::new();
        let mut responses = Vec::new();
        for record in reader.records() {
            let record = record?;
            let parse = |i: usize| -> Result<f64> {
                record
                    .get(i)
                    .ok_or_else(|| Error::Validation("short CSV row".into()))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Validation(format!("bad number in CSV: {e}")))
            };
            let mut a = DVector::zeros(m);
            let mut b = DVector::zeros(m);
            for i in 0..m {
                a[i] = parse(1 + i)?;
                b[i] = parse(1 + m + i)?;
            }
            probes.push(a);
            responses.push(b);
        }
        Self::new(probes, responses, budget)
    }
}

/// Serializable form of a budget for the JSON sidecar. `Callable` budgets
/// and custom `P` builders are in-process constructs and have no sidecar
/// form.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BudgetSidecar {
    Linear { p_star: f64 },
    SinrQuadratic { q: Vec<Vec<f64>>, p_builder: PBuilderSidecar, gamma: f64, delta: f64 },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PBuilderSidecar {
    DiagonalLoading { ridge: f64 },
    NegativeCoupling { coupling: f64 },
}

impl BudgetSidecar {
    pub fn from_budget(budget: &BudgetSpec) -> Result<Self> {
        match budget {
            BudgetSpec::Linear { p_star } => Ok(BudgetSidecar::Linear { p_star: *p_star }),
            BudgetSpec::SinrQuadratic(b) => {
                let p_builder = match b.p_builder {
                    PBuilder::DiagonalLoading { ridge } => PBuilderSidecar::DiagonalLoading { ridge },
                    PBuilder::NegativeCoupling { coupling } => {
                        PBuilderSidecar::NegativeCoupling { coupling }
                    }
                    PBuilder::Custom(_) => {
                        return Err(Error::Validation(
                            "custom P builders have no sidecar form".into(),
                        ))
                    }
                };
                let q = (0..b.q.nrows())
                    .map(|i| (0..b.q.ncols()).map(|j| b.q[(i, j)]).collect())
                    .collect();
                Ok(BudgetSidecar::SinrQuadratic { q, p_builder, gamma: b.gamma, delta: b.delta })
            }
            BudgetSpec::Callable(_) => Err(Error::Validation(
                "callable budgets have no sidecar form".into(),
            )),
        }
    }

    pub fn into_budget(self) -> Result<BudgetSpec> {
        match self {
            BudgetSidecar::Linear { p_star } => Ok(BudgetSpec::Linear { p_star }),
            BudgetSidecar::SinrQuadratic { q, p_builder, gamma, delta } => {
                let n = q.len();
                if q.iter().any(|row| row.len() != n) {
                    return Err(Error::Validation("Q must be square".into()));
                }
                let flat: Vec<f64> = q.iter().flatten().copied().collect();
                let p_builder = match p_builder {
                    PBuilderSidecar::DiagonalLoading { ridge } => PBuilder::DiagonalLoading { ridge },
                    PBuilderSidecar::NegativeCoupling { coupling } => {
                        PBuilder::NegativeCoupling { coupling }
                    }
                };
                Ok(BudgetSpec::SinrQuadratic(SinrBudget {
                    q: DMatrix::from_row_slice(n, n, &flat),
                    p_builder,
                    gamma,
                    delta,
                }))
            }
        }
    }
}
