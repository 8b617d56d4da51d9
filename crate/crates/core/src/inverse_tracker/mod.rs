//! Our estimator of the adversary's belief.
//!
//! Substituting the observation equation into the adversary's Kalman update
//! turns its conditional-mean sequence into a linear Gaussian system driven by
//! our known state:
//!
//! ```text
//! xhat_{k+1} = (I - psi_{k+1} C) A xhat_k + psi_{k+1} C x_{k+1} + psi_{k+1} v_{k+1}
//! a_k        = phi(Sigma_k) xhat_k + eps_k
//! ```
//!
//! so estimating `xhat_k` from `(a_{1:k}, x_{0:k})` is itself a Kalman
//! filtering problem with parameters
//!
//! ```text
//! Abar_k = (I - psi_{k+1} C) A      Fbar_k = psi_{k+1} C
//! Cbar_k = phi(Sigma_k)             Qbar_k = psi_{k+1} R psi_{k+1}'
//! Rbar   = sigma_eps^2 I
//! ```
//!
//! `psi_k` and `Sigma_k` come from the adversary's filter and are
//! deterministic, so the whole parameter sequence is known to us. The
//! module also provides a particle approximation of the general inverse
//! filter ([`inverse_particle_filter`]) whose proposal samples the adversary's
//! observation and pushes each particle through its exact update.

mod particle;

pub use particle::{inverse_particle_filter, ParticleCloud, RESAMPLE_THRESHOLD};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{innovation_inverse, spd_inverse, symmetrize};
use crate::statespace::{ActionMap, EngagementTrace, GaussianBelief, LinearGaussianModel};
use crate::tracker::CONDITION_LIMIT;

/// Convention for the process-noise covariance `Qbar` of the inverse system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QbarConvention {
    /// `Qbar = psi R psi'` — the covariance of the driving term
    /// `psi v_{k+1}`, `v ~ N(0, R)`. Default.
    #[default]
    ObsNoiseWeighted,
    /// `Qbar = psi psi'` — treats the driving observation noise as having
    /// unit covariance. Compatibility switch; identical when `R = I`.
    UnitNoise,
}

/// Parameters of the inverse linear-Gaussian system for one transition.
/// `params[k]` drives `xhat_k -> xhat_{k+1}` and the measurement of
/// `a_{k+1}`: `a_bar`/`f_bar`/`q_bar` use the adversary's gain `psi_{k+1}`,
/// and `c_bar` is `phi(Sigma_{k+1})`, the gain applied to the posterior being
/// measured.
#[derive(Debug, Clone)]
pub struct InverseModelParams {
    pub a_bar: DMatrix<f64>,
    pub f_bar: DMatrix<f64>,
    pub c_bar: DMatrix<f64>,
    pub q_bar: DMatrix<f64>,
    pub r_bar: DMatrix<f64>,
}

/// The adversary's deterministic filter quantities for steps `1..=horizon`:
/// `(psi_k, Sigma_k)`.
pub(crate) fn adversary_gain_sequence(
    model: &LinearGaussianModel,
    horizon: usize,
) -> Result<Vec<(DMatrix<f64>, DMatrix<f64>)>> {
    let a = model.a();
    let c = model.c();
    let mut cov = model.prior_cov().clone();
    let mut out = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let predicted = symmetrize(&(a * &cov * a.transpose() + model.q()));
        let s = symmetrize(&(c * &predicted * c.transpose() + model.r()));
        let s_inv = innovation_inverse("innovation covariance S", &s, CONDITION_LIMIT)?;
        let gain = &predicted * c.transpose() * &s_inv;
        cov = symmetrize(&(&predicted - &gain * &s * gain.transpose()));
        out.push((gain, cov.clone()));
    }
    Ok(out)
}

/// Inverse-system parameters for steps `0..horizon` under the default
/// `Qbar` convention.
pub fn derive_inverse_params(
    model: &LinearGaussianModel,
    action_map: &ActionMap,
    horizon: usize,
) -> Result<Vec<InverseModelParams>> {
    derive_inverse_params_with(model, action_map, horizon, QbarConvention::default())
}

/// As [`derive_inverse_params`], with an explicit `Qbar` convention.
pub fn derive_inverse_params_with(
    model: &LinearGaussianModel,
    action_map: &ActionMap,
    horizon: usize,
    qbar: QbarConvention,
) -> Result<Vec<InverseModelParams>> {
    if horizon == 0 {
        return Ok(Vec::new());
    }
    let x = model.state_dim();
    let a = model.a();
    let c = model.c();
    let identity = DMatrix::<f64>::identity(x, x);
    let r_bar = &identity * action_map.action_noise_var;

    let gains = adversary_gain_sequence(model, horizon)?;
    let mut out = Vec::with_capacity(horizon);
    for (psi, cov) in &gains {
        let f_bar = psi * c;
        let a_bar = (&identity - &f_bar) * a;
        let q_bar = match qbar {
            QbarConvention::ObsNoiseWeighted => symmetrize(&(psi * model.r() * psi.transpose())),
            QbarConvention::UnitNoise => symmetrize(&(psi * psi.transpose())),
        };
        out.push(InverseModelParams {
            a_bar,
            f_bar,
            c_bar: action_map.gain(cov),
            q_bar,
            r_bar: r_bar.clone(),
        });
    }
    Ok(out)
}

/// One inverse-Kalman update with the innovation it consumed.
#[derive(Debug, Clone)]
pub struct InverseStep {
    pub belief: GaussianBelief,
    pub innovation: DVector<f64>,
    pub innovation_cov: DMatrix<f64>,
}

/// One covariance-form step of our inverse Kalman filter: from our belief
/// `(xhathat_k, Sigmabar_k)` of the adversary's mean, the observed action
/// `a_{k+1}` and our known next state `x_{k+1}`, produce
/// `(xhathat_{k+1}, Sigmabar_{k+1})`.
pub fn inverse_kalman_step(
    params: &InverseModelParams,
    belief: &GaussianBelief,
    action: &DVector<f64>,
    our_state_next: &DVector<f64>,
) -> Result<InverseStep> {
    let predicted_cov = symmetrize(&(&params.a_bar * belief.cov() * params.a_bar.transpose() + &params.q_bar));
    let innovation_cov =
        symmetrize(&(&params.c_bar * &predicted_cov * params.c_bar.transpose() + &params.r_bar));
    let s_inv = innovation_inverse("inverse innovation covariance", &innovation_cov, CONDITION_LIMIT)?;
    let gain = &predicted_cov * params.c_bar.transpose() * &s_inv;

    let predicted_mean = &params.a_bar * &belief.mean + &params.f_bar * our_state_next;
    let innovation = action - &params.c_bar * &predicted_mean;
    let mean = &predicted_mean + &gain * &innovation;
    let cov = symmetrize(&(&predicted_cov - &gain * &innovation_cov * gain.transpose()));

    Ok(InverseStep {
        belief: GaussianBelief::new(mean, cov)?,
        innovation,
        innovation_cov,
    })
}

/// Information-form variant of [`inverse_kalman_step`]; requires `Rbar` and
/// the predicted covariance to be invertible.
pub fn inverse_kalman_step_information(
    params: &InverseModelParams,
    belief: &GaussianBelief,
    action: &DVector<f64>,
    our_state_next: &DVector<f64>,
) -> Result<InverseStep> {
    let predicted_cov = symmetrize(&(&params.a_bar * belief.cov() * params.a_bar.transpose() + &params.q_bar));
    let predicted_info = spd_inverse("inverse predicted covariance", &predicted_cov)?;
    let r_inv = spd_inverse("Rbar", &params.r_bar)?;

    let info = symmetrize(&(&predicted_info + params.c_bar.transpose() * &r_inv * &params.c_bar));
    let cov = spd_inverse("inverse posterior information", &info)?;
    let gain = &cov * params.c_bar.transpose() * &r_inv;

    let innovation_cov =
        symmetrize(&(&params.c_bar * &predicted_cov * params.c_bar.transpose() + &params.r_bar));
    let predicted_mean = &params.a_bar * &belief.mean + &params.f_bar * our_state_next;
    let innovation = action - &params.c_bar * &predicted_mean;
    let mean = &predicted_mean + &gain * &innovation;

    Ok(InverseStep {
        belief: GaussianBelief::new(mean, symmetrize(&cov))?,
        innovation,
        innovation_cov,
    })
}

fn check_trace(model: &LinearGaussianModel, trace: &EngagementTrace) -> Result<usize> {
    let n = trace.horizon();
    if trace.states.len() != n + 1 {
        return Err(Error::Validation(format!(
            "trace has {} states for {n} actions; expected {}",
            trace.states.len(),
            n + 1
        )));
    }
    if let Some(x) = trace.states.first() {
        if x.len() != model.state_dim() {
            return Err(Error::Validation("trace state dimension does not match model".into()));
        }
    }
    Ok(n)
}

/// Run the inverse Kalman filter along a trace. Initialization: we share the
/// adversary's prior, so `xhathat_0 = prior_mean` with `Sigmabar_0 = 0`.
/// Returns our belief of `xhat_k` for `k = 1..=N`.
pub fn inverse_kalman_run(
    model: &LinearGaussianModel,
    action_map: &ActionMap,
    trace: &EngagementTrace,
) -> Result<Vec<GaussianBelief>> {
    let n = check_trace(model, trace)?;
    let params = derive_inverse_params(model, action_map, n)?;
    let mut belief = GaussianBelief::certain(model.prior_mean().clone());
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let step = inverse_kalman_step(&params[k], &belief, &trace.actions[k], &trace.states[k + 1])?;
        belief = step.belief;
        out.push(belief.clone());
    }
    Ok(out)
}

/// JSON document form of a belief sequence, matching the trace document's
/// row-major conventions: per-step means and flattened covariances.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct BeliefDocument {
    pub dim: usize,
    pub means: Vec<Vec<f64>>,
    /// Row-major `dim*dim` entries per step.
    pub covs: Vec<Vec<f64>>,
}

impl BeliefDocument {
    pub fn from_beliefs(beliefs: &[GaussianBelief]) -> Self {
        let dim = beliefs.first().map_or(0, |b| b.dim());
        Self {
            dim,
            means: beliefs.iter().map(|b| b.mean.iter().copied().collect()).collect(),
            covs: beliefs
                .iter()
                .map(|b| b.cov().transpose().as_slice().to_vec())
                .collect(),
        }
    }

    pub fn to_beliefs(&self) -> Result<Vec<GaussianBelief>> {
        self.means
            .iter()
            .zip(&self.covs)
            .map(|(m, c)| {
                if m.len() != self.dim || c.len() != self.dim * self.dim {
                    return Err(Error::Validation("belief document has inconsistent dimensions".into()));
                }
                GaussianBelief::new(
                    DVector::from_row_slice(m),
                    DMatrix::from_row_slice(self.dim, self.dim, c),
                )
            })
            .collect()
    }
}
