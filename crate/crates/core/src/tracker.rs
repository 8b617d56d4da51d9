//! The adversary's forward Kalman filter and the Riccati predictor fixed
//! point used by the beam-allocation probe.
//!
//! One step of the filter, from posterior `(xhat_k, Sigma_k)` and observation
//! `y_{k+1}`:
//!
//! ```text
//! Sigma_{k+1|k} = A Sigma_k A' + Q
//! S_{k+1}       = C Sigma_{k+1|k} C' + R
//! psi_{k+1}     = Sigma_{k+1|k} C' S_{k+1}^-1
//! xhat_{k+1}    = A xhat_k + psi_{k+1} (y_{k+1} - C A xhat_k)
//! Sigma_{k+1}   = Sigma_{k+1|k} - psi_{k+1} S_{k+1} psi_{k+1}'
//! ```
//!
//! The information-form update is provided as a cross-check path; covariance
//! updates are symmetrized after every step.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{innovation_inverse, spd_inverse, symmetrize};
use crate::statespace::{GaussianBelief, LinearGaussianModel};

/// Innovation covariances with condition number above this are rejected.
pub const CONDITION_LIMIT: f64 = 1e12;

/// All quantities of one Kalman update.
#[derive(Debug, Clone)]
pub struct KalmanStep {
    pub predicted_cov: DMatrix<f64>,
    pub innovation_cov: DMatrix<f64>,
    pub gain: DMatrix<f64>,
    pub posterior: GaussianBelief,
}

/// One covariance-form Kalman update.
pub fn kalman_step(
    model: &LinearGaussianModel,
    belief: &GaussianBelief,
    observation: &nalgebra::DVector<f64>,
) -> Result<KalmanStep> {
    if belief.dim() != model.state_dim() {
        return Err(Error::Config("belief dimension does not match model".into()));
    }
    if observation.len() != model.obs_dim() {
        return Err(Error::Config("observation dimension does not match model".into()));
    }
    let a = model.a();
    let c = model.c();

    let predicted_cov = symmetrize(&(a * belief.cov() * a.transpose() + model.q()));
    let innovation_cov = symmetrize(&(c * &predicted_cov * c.transpose() + model.r()));
    let s_inv = innovation_inverse("innovation covariance S", &innovation_cov, CONDITION_LIMIT)?;
    let gain = &predicted_cov * c.transpose() * &s_inv;

    let predicted_mean = a * &belief.mean;
    let innovation = observation - c * &predicted_mean;
    let mean = &predicted_mean + &gain * innovation;
    let cov = symmetrize(&(&predicted_cov - &gain * &innovation_cov * gain.transpose()));
    let posterior = GaussianBelief::new(mean, cov)?;

    Ok(KalmanStep { predicted_cov, innovation_cov, gain, posterior })
}

/// Information-form update: `Sigma_{k+1}^-1 = Sigma_{k+1|k}^-1 + C' R^-1 C`,
/// `psi_{k+1} = Sigma_{k+1} C' R^-1`. Requires `R` and the predicted
/// covariance to be invertible. Agrees with [`kalman_step`] to rounding.
pub fn kalman_step_information(
    model: &LinearGaussianModel,
    belief: &GaussianBelief,
    observation: &nalgebra::DVector<f64>,
) -> Result<KalmanStep> {
    let a = model.a();
    let c = model.c();

    let predicted_cov = symmetrize(&(a * belief.cov() * a.transpose() + model.q()));
    let predicted_info = spd_inverse("predicted covariance", &predicted_cov)?;
    let r_inv = spd_inverse("R", model.r())?;

    let info = symmetrize(&(&predicted_info + c.transpose() * &r_inv * c));
    let cov = spd_inverse("posterior information", &info)?;
    let gain = &cov * c.transpose() * &r_inv;

    let innovation_cov = symmetrize(&(c * &predicted_cov * c.transpose() + model.r()));
    let predicted_mean = a * &belief.mean;
    let innovation = observation - c * &predicted_mean;
    let mean = &predicted_mean + &gain * innovation;
    let posterior = GaussianBelief::new(mean, symmetrize(&cov))?;

    Ok(KalmanStep { predicted_cov, innovation_cov, gain, posterior })
}

/// Fixed point of the one-step Riccati predictor, found by repeated
/// substitution from `Sigma = Q`. Converges for detectable/stabilizable
/// models; divergence within `max_iter` is reported as an error.
pub fn predicted_covariance_fixed_point(
    model: &LinearGaussianModel,
    tol: f64,
    max_iter: usize,
) -> Result<DMatrix<f64>> {
    if tol <= 0.0 {
        return Err(Error::Validation("tol must be > 0".into()));
    }
    if max_iter == 0 {
        return Err(Error::Validation("max_iter must be >= 1".into()));
    }
    let a = model.a();
    let c = model.c();
    let mut sigma = model.q().clone();
    for _ in 0..max_iter {
        let s = symmetrize(&(c * &sigma * c.transpose() + model.r()));
        let s_inv = innovation_inverse("Riccati innovation covariance", &s, CONDITION_LIMIT)?;
        let gain = &sigma * c.transpose() * &s_inv;
        let posterior = symmetrize(&(&sigma - &gain * &s * gain.transpose()));
        let next = symmetrize(&(a * posterior * a.transpose() + model.q()));
        let delta = (&next - &sigma).norm();
        sigma = next;
        if delta < tol {
            return Ok(sigma);
        }
    }
    Err(Error::Divergence(format!(
        "Riccati iteration did not reach tol {tol:.1e} within {max_iter} iterations"
    )))
}
