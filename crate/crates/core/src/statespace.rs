//! Core state-space types and the coupled us/adversary engagement simulation.
//!
//! The engagement evolves as
//!
//! - `x_{k+1} = A x_k + w_k`, `w_k ~ N(0, Q)`, `x_0 ~ N(prior_mean, prior_cov)`
//! - `y_k = C x_k + v_k`, `v_k ~ N(0, R)` (the adversary's observation)
//! - `(xhat_k, Sigma_k)` from the adversary's Kalman filter over `y`
//! - `a_k = phi(Sigma_k) xhat_k + eps_k`, `eps_k ~ N(0, sigma_eps^2 I)`
//!   (our noisy measurement of the adversary's action)
//!
//! Time indexing: `x_0` is drawn from the prior; `y`, `xhat` and `a` start at
//! `k = 1`. Every draw is keyed by `(seed, domain, step)` so a trace replays
//! bit-exactly from its seed.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, validate_psd};
use crate::rng::{domain, substream};
use crate::tracker;

/// Shared linear-Gaussian state space: `A`, `C`, `Q`, `R` and the prior
/// `(prior_mean, prior_cov)`. Both sides know these parameters.
#[derive(Debug, Clone)]
pub struct LinearGaussianModel {
    a: DMatrix<f64>,
    c: DMatrix<f64>,
    q: DMatrix<f64>,
    r: DMatrix<f64>,
    prior_mean: DVector<f64>,
    prior_cov: DMatrix<f64>,
}

impl LinearGaussianModel {
    /// Validates dimensions and that `Q`, `R`, `prior_cov` are symmetric PSD.
    /// Rank-deficient covariances (including exact zeros) are accepted; the
    /// filters guard their own innovation inversions.
    pub fn new(
        a: DMatrix<f64>,
        c: DMatrix<f64>,
        q: DMatrix<f64>,
        r: DMatrix<f64>,
        prior_mean: DVector<f64>,
        prior_cov: DMatrix<f64>,
    ) -> Result<Self> {
        let x = a.nrows();
        if a.ncols() != x || x == 0 {
            return Err(Error::Config(format!(
                "A must be square and non-empty, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        let y = c.nrows();
        if c.ncols() != x || y == 0 {
            return Err(Error::Config(format!(
                "C must be Yx{x} with Y >= 1, got {}x{}",
                c.nrows(),
                c.ncols()
            )));
        }
        if q.nrows() != x || q.ncols() != x {
            return Err(Error::Config(format!("Q must be {x}x{x}")));
        }
        if r.nrows() != y || r.ncols() != y {
            return Err(Error::Config(format!("R must be {y}x{y}")));
        }
        if prior_mean.len() != x {
            return Err(Error::Config(format!("prior_mean must have length {x}")));
        }
        if prior_cov.nrows() != x || prior_cov.ncols() != x {
            return Err(Error::Config(format!("prior_cov must be {x}x{x}")));
        }
        let q = validate_psd("Q", &q)?;
        let r = validate_psd("R", &r)?;
        let prior_cov = validate_psd("prior_cov", &prior_cov)?;
        Ok(Self { a, c, q, r, prior_mean, prior_cov })
    }

    /// Scalar shorthand: every parameter is 1x1.
    pub fn scalar(a: f64, c: f64, q: f64, r: f64, prior_mean: f64, prior_cov: f64) -> Result<Self> {
        Self::new(
            DMatrix::from_element(1, 1, a),
            DMatrix::from_element(1, 1, c),
            DMatrix::from_element(1, 1, q),
            DMatrix::from_element(1, 1, r),
            DVector::from_element(1, prior_mean),
            DMatrix::from_element(1, 1, prior_cov),
        )
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn obs_dim(&self) -> usize {
        self.c.nrows()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn r(&self) -> &DMatrix<f64> {
        &self.r
    }

    pub fn prior_mean(&self) -> &DVector<f64> {
        &self.prior_mean
    }

    pub fn prior_cov(&self) -> &DMatrix<f64> {
        &self.prior_cov
    }

    /// Same model with the sensor gain replaced.
    pub fn with_gain(&self, c: DMatrix<f64>) -> Result<Self> {
        Self::new(
            self.a.clone(),
            c,
            self.q.clone(),
            self.r.clone(),
            self.prior_mean.clone(),
            self.prior_cov.clone(),
        )
    }

    /// Same model with a scalar sensor gain `theta` (requires a 1x1 `C`).
    pub fn with_scalar_gain(&self, theta: f64) -> Result<Self> {
        if self.c.nrows() != 1 || self.c.ncols() != 1 {
            return Err(Error::Config("scalar gain requires a 1x1 C".into()));
        }
        self.with_gain(DMatrix::from_element(1, 1, theta))
    }

    pub fn with_process_cov(&self, q: DMatrix<f64>) -> Result<Self> {
        Self::new(
            self.a.clone(),
            self.c.clone(),
            q,
            self.r.clone(),
            self.prior_mean.clone(),
            self.prior_cov.clone(),
        )
    }

    pub fn with_obs_cov(&self, r: DMatrix<f64>) -> Result<Self> {
        Self::new(
            self.a.clone(),
            self.c.clone(),
            self.q.clone(),
            r,
            self.prior_mean.clone(),
            self.prior_cov.clone(),
        )
    }
}

/// A Gaussian belief `(mean, cov)`. Construction symmetrizes the covariance
/// and clamps eigenvalues in `[-1e-12, 0)` to zero; anything more negative is
/// rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianBelief {
    pub mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl GaussianBelief {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        if cov.nrows() != mean.len() || cov.ncols() != mean.len() {
            return Err(Error::Config(format!(
                "covariance must be {n}x{n} for a mean of length {n}",
                n = mean.len()
            )));
        }
        let cov = validate_psd("belief covariance", &cov)?;
        Ok(Self { mean, cov })
    }

    /// Point belief with zero covariance.
    pub fn certain(mean: DVector<f64>) -> Self {
        let n = mean.len();
        Self { mean, cov: DMatrix::zeros(n, n) }
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

/// How the adversary's belief maps to the action gain `phi(Sigma)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhiKind {
    /// `phi(Sigma) = I`.
    Identity,
    /// `phi(Sigma) = (1 + trace(Sigma))^-1 I`, shrinking the action when the
    /// adversary is uncertain. Nonsingular for any PSD `Sigma`.
    InverseTraceScaled,
}

/// The action channel `a = phi(Sigma) xhat + eps`, `eps ~ N(0, sigma_eps^2 I)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionMap {
    pub phi_kind: PhiKind,
    pub action_noise_var: f64,
}

impl ActionMap {
    pub fn new(phi_kind: PhiKind, action_noise_var: f64) -> Result<Self> {
        if !action_noise_var.is_finite() || action_noise_var < 0.0 {
            return Err(Error::Validation(format!(
                "action_noise_var must be finite and >= 0, got {action_noise_var}"
            )));
        }
        Ok(Self { phi_kind, action_noise_var })
    }

    pub fn identity(action_noise_var: f64) -> Result<Self> {
        Self::new(PhiKind::Identity, action_noise_var)
    }

    /// The gain matrix `phi(Sigma)`.
    pub fn gain(&self, cov: &DMatrix<f64>) -> DMatrix<f64> {
        let n = cov.nrows();
        match self.phi_kind {
            PhiKind::Identity => DMatrix::identity(n, n),
            PhiKind::InverseTraceScaled => DMatrix::identity(n, n) / (1.0 + cov.trace()),
        }
    }
}

/// One realized engagement: our states, the adversary's observations and
/// filtered beliefs, and our measurements of its actions. `states` has length
/// `N + 1` (including `x_0`); all other sequences have length `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct EngagementTrace {
    pub states: Vec<DVector<f64>>,
    pub observations: Vec<DVector<f64>>,
    pub adversary_means: Vec<DVector<f64>>,
    pub adversary_covs: Vec<DMatrix<f64>>,
    pub actions: Vec<DVector<f64>>,
    pub seed: u64,
}

impl EngagementTrace {
    /// Number of engagement steps `N`.
    pub fn horizon(&self) -> usize {
        self.actions.len()
    }

    fn check_lengths(&self) -> Result<()> {
        let n = self.horizon();
        if self.states.len() != n + 1
            || self.observations.len() != n
            || self.adversary_means.len() != n
            || self.adversary_covs.len() != n
        {
            return Err(Error::Validation(
                "trace sequences have inconsistent lengths".into(),
            ));
        }
        Ok(())
    }
}

/// Simulate `horizon` steps of the engagement. Pure in its arguments: the
/// same `(model, action_map, horizon, seed)` reproduces the trace bit-exactly.
pub fn simulate_engagement(
    model: &LinearGaussianModel,
    action_map: &ActionMap,
    horizon: usize,
    seed: u64,
) -> Result<EngagementTrace> {
    if horizon == 0 {
        return Err(Error::Validation("horizon must be >= 1".into()));
    }
    let sigma_eps = action_map.action_noise_var.sqrt();
    let x_dim = model.state_dim();

    let mut rng = substream(seed, domain::SIM_INIT, 0, 0);
    let x0 = model.prior_mean() + linalg::sample_mvn_zero(&mut rng, model.prior_cov())?;

    let mut states = Vec::with_capacity(horizon + 1);
    let mut observations = Vec::with_capacity(horizon);
    let mut adversary_means = Vec::with_capacity(horizon);
    let mut adversary_covs = Vec::with_capacity(horizon);
    let mut actions = Vec::with_capacity(horizon);

    states.push(x0);
    let mut belief = GaussianBelief::new(model.prior_mean().clone(), model.prior_cov().clone())?;

    for k in 1..=horizon as u64 {
        let mut rng_w = substream(seed, domain::SIM_PROCESS, 0, k);
        let w = linalg::sample_mvn_zero(&mut rng_w, model.q())?;
        let x = model.a() * states.last().expect("non-empty") + w;

        let mut rng_v = substream(seed, domain::SIM_OBSERVATION, 0, k);
        let v = linalg::sample_mvn_zero(&mut rng_v, model.r())?;
        let y = model.c() * &x + v;

        let step = tracker::kalman_step(model, &belief, &y)?;
        belief = step.posterior;

        let mut rng_e = substream(seed, domain::SIM_ACTION, 0, k);
        let eps = DVector::from_fn(x_dim, |_, _| {
            sigma_eps * rng_e.sample::<f64, _>(rand_distr::StandardNormal)
        });
        let action = action_map.gain(belief.cov()) * &belief.mean + eps;

        states.push(x);
        observations.push(y);
        adversary_means.push(belief.mean.clone());
        adversary_covs.push(belief.cov().clone());
        actions.push(action);
    }

    Ok(EngagementTrace {
        states,
        observations,
        adversary_means,
        adversary_covs,
        actions,
        seed,
    })
}

// --- serialization -----------------------------------------------------------

fn vecs_to_rows(v: &[DVector<f64>]) -> Vec<Vec<f64>> {
    v.iter().map(|x| x.iter().copied().collect()).collect()
}

fn rows_to_vecs(rows: &[Vec<f64>]) -> Vec<DVector<f64>> {
    rows.iter().map(|r| DVector::from_row_slice(r)).collect()
}

/// JSON document form of a trace: row-major number arrays plus the seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceDocument {
    pub seed: u64,
    pub state_dim: usize,
    pub obs_dim: usize,
    pub states: Vec<Vec<f64>>,
    pub observations: Vec<Vec<f64>>,
    pub adversary_means: Vec<Vec<f64>>,
    /// Row-major `X*X` entries per step.
    pub adversary_covs: Vec<Vec<f64>>,
    pub actions: Vec<Vec<f64>>,
}

impl EngagementTrace {
    pub fn to_document(&self) -> TraceDocument {
        let x_dim = self.states.first().map_or(0, |v| v.len());
        let y_dim = self.observations.first().map_or(0, |v| v.len());
        TraceDocument {
            seed: self.seed,
            state_dim: x_dim,
            obs_dim: y_dim,
            states: vecs_to_rows(&self.states),
            observations: vecs_to_rows(&self.observations),
            adversary_means: vecs_to_rows(&self.adversary_means),
            adversary_covs: self
                .adversary_covs
                .iter()
                .map(|m| m.transpose().as_slice().to_vec()) // nalgebra stores column-major
                .collect(),
            actions: vecs_to_rows(&self.actions),
        }
    }

    pub fn from_document(doc: &TraceDocument) -> Result<Self> {
        let x = doc.state_dim;
        let covs = doc
            .adversary_covs
            .iter()
            .map(|flat| {
                if flat.len() != x * x {
                    return Err(Error::Validation("covariance row has wrong length".into()));
                }
                Ok(DMatrix::from_row_slice(x, x, flat))
            })
            .collect::<Result<Vec<_>>>()?;
        let trace = Self {
            states: rows_to_vecs(&doc.states),
            observations: rows_to_vecs(&doc.observations),
            adversary_means: rows_to_vecs(&doc.adversary_means),
            adversary_covs: covs,
            actions: rows_to_vecs(&doc.actions),
            seed: doc.seed,
        };
        trace.check_lengths()?;
        Ok(trace)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: TraceDocument = serde_json::from_str(text)?;
        Self::from_document(&doc)
    }

    /// CSV with one row per `k`. Row `k = 0` carries the initial state only;
    /// rows `k = 1..N` carry `x_k`, `y_k`, `xhat_k`, `diag(Sigma_k)` and `a_k`.
    /// When `beliefs` is given (our inverse-filter output, length `N`), the
    /// columns `xhathat_*` and `sigmabar_diag_*` are appended.
    pub fn to_csv(&self, beliefs: Option<&[GaussianBelief]>) -> Result<String> {
        self.check_lengths()?;
        let n = self.horizon();
        if let Some(b) = beliefs {
            if b.len() != n {
                return Err(Error::Validation(format!(
                    "belief sequence has length {}, trace has {n} steps",
                    b.len()
                )));
            }
        }
        let x_dim = self.states[0].len();
        let y_dim = self.observations.first().map_or(0, |v| v.len());

        let mut header: Vec<String> = vec!["k".into()];
        let cols = |prefix: &str, d: usize| (1..=d).map(move |i| format!("{prefix}_{i}")).collect::<Vec<_>>();
        header.extend(cols("x", x_dim));
        header.extend(cols("y", y_dim));
        header.extend(cols("xhat", x_dim));
        header.extend(cols("sigma_diag", x_dim));
        header.extend(cols("a", x_dim));
        if beliefs.is_some() {
            header.extend(cols("xhathat", x_dim));
            header.extend(cols("sigmabar_diag", x_dim));
        }

        let mut out = header.join(",");
        out.push('\n');

        let push_vec = |row: &mut Vec<String>, v: &DVector<f64>| {
            row.extend(v.iter().map(|x| x.to_string()));
        };
        let push_blank = |row: &mut Vec<String>, d: usize| {
            row.extend(std::iter::repeat(String::new()).take(d));
        };

        for k in 0..=n {
            let mut row: Vec<String> = vec![k.to_string()];
            push_vec(&mut row, &self.states[k]);
            if k == 0 {
                push_blank(&mut row, y_dim + 3 * x_dim);
                if beliefs.is_some() {
                    push_blank(&mut row, 2 * x_dim);
                }
            } else {
                let i = k - 1;
                push_vec(&mut row, &self.observations[i]);
                push_vec(&mut row, &self.adversary_means[i]);
                row.extend((0..x_dim).map(|d| self.adversary_covs[i][(d, d)].to_string()));
                push_vec(&mut row, &self.actions[i]);
                if let Some(b) = beliefs {
                    push_vec(&mut row, &b[i].mean);
                    row.extend((0..x_dim).map(|d| b[i].cov()[(d, d)].to_string()));
                }
            }
            out.push_str(&row.join(","));
            out.push('\n');
        }
        Ok(out)
    }
}
