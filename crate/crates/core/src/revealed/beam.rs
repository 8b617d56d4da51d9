//! Beam-allocation probes and the closed-loop scenario generator.
//!
//! In the beam-allocation setting, each component of the probe is the
//! steady-state tracking accuracy the adversary's filter can achieve on one
//! of our targets: `alpha(i) = trace(inverse(Sigma_pred(i)))`, where
//! `Sigma_pred(i)` is the Riccati predictor fixed point of target `i`. We
//! steer the probe by choosing maneuver covariances; the adversary responds
//! with per-target time fractions `beta`.

use nalgebra::DVector;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::spd_inverse;
use crate::rng::{domain, substream};
use crate::statespace::LinearGaussianModel;
use crate::tracker::predicted_covariance_fixed_point;

use super::{BudgetSpec, RPDataset};

const RICCATI_TOL: f64 = 1e-10;
const RICCATI_MAX_ITER: usize = 100_000;

/// Probe vector over `m` per-target models:
/// `alpha_i = trace(Sigma_pred_i^-1)` at the Riccati fixed point.
pub fn beam_probe(targets: &[LinearGaussianModel]) -> Result<DVector<f64>> {
    if targets.is_empty() {
        return Err(Error::Validation("need at least one target".into()));
    }
    let mut alpha = DVector::zeros(targets.len());
    for (i, model) in targets.iter().enumerate() {
        let sigma = predicted_covariance_fixed_point(model, RICCATI_TOL, RICCATI_MAX_ITER)?;
        alpha[i] = spd_inverse("predicted covariance", &sigma)?.trace();
    }
    Ok(alpha)
}

/// Closed-loop beam engagement: per epoch we pick maneuver covariances (the
/// probe), the adversary allocates beam fractions, and its per-target
/// observation noise for the next epoch scales as `R_0 / beta` (more dwell
/// time, less noise).
#[derive(Debug, Clone)]
pub struct BeamScenario {
    /// Per-target base models; `q()` and `r()` are the baseline covariances.
    pub targets: Vec<LinearGaussianModel>,
    pub epochs: usize,
    /// Cobb–Douglas weights of the adversary's allocation utility.
    pub weights: DVector<f64>,
    /// Log-uniform range for the per-epoch maneuver covariance scaling.
    pub maneuver_scale: (f64, f64),
    pub seed: u64,
}

/// Run the closed loop and return the probe/response dataset (linear budget,
/// `p_star = 1`). Responses come from a fixed Cobb–Douglas maximizer, so the
/// dataset is rational by construction.
pub fn closed_loop_beam_dataset(scenario: &BeamScenario) -> Result<RPDataset> {
    let m = scenario.targets.len();
    if m == 0 || scenario.epochs == 0 {
        return Err(Error::Validation("need at least one target and one epoch".into()));
    }
    if scenario.weights.len() != m {
        return Err(Error::Validation("weights length must match target count".into()));
    }
    let (lo, hi) = scenario.maneuver_scale;
    if !(lo > 0.0 && hi >= lo) {
        return Err(Error::Validation("maneuver_scale must satisfy 0 < lo <= hi".into()));
    }
    let total_w: f64 = scenario.weights.iter().sum();

    let mut beta_prev = DVector::from_element(m, 1.0 / m as f64);
    let mut probes = Vec::with_capacity(scenario.epochs);
    let mut responses = Vec::with_capacity(scenario.epochs);

    for n in 1..=scenario.epochs as u64 {
        let mut epoch_targets = Vec::with_capacity(m);
        for (i, base) in scenario.targets.iter().enumerate() {
            let mut rng = substream(scenario.seed, domain::BEAM_SCENARIO, i as u64, n);
            let scale = (lo.ln() + (hi.ln() - lo.ln()) * rng.random::<f64>()).exp();
            let model = base
                .with_process_cov(base.q() * scale)?
                .with_obs_cov(base.r() / beta_prev[i])?;
            epoch_targets.push(model);
        }
        let alpha = beam_probe(&epoch_targets)?;
        // Cobb-Douglas closed form on the unit budget.
        let beta = DVector::from_fn(m, |i, _| scenario.weights[i] / total_w / alpha[i]);
        probes.push(alpha);
        responses.push(beta.clone());
        beta_prev = beta;
    }

    RPDataset::new(probes, responses, BudgetSpec::linear())
}
