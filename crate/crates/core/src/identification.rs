//! Estimation and calibration of the adversary's sensor gain `C`.
//!
//! Two innovations log-likelihoods are provided for a candidate gain `theta`:
//!
//! - [`loglik_classic`]: the standard state-space likelihood of `theta` from
//!   the adversary's own observations `y_{1:N}` (what the adversary could
//!   compute about itself);
//! - [`loglik_inverse`]: the likelihood of `theta` from what *we* see — our
//!   states and the noisy actions — evaluated through the inverse Kalman
//!   filter's innovations.
//!
//! Both have the Gaussian form
//! `l = -(N d / 2) ln 2pi - 1/2 sum ln|S_k| - 1/2 sum iota' S_k^-1 iota`,
//! where `d` is the innovation dimension of the respective filter.
//!
//! On top of the likelihoods: grid + golden-section MLE ([`mle_gain`]),
//! finite-difference sensitivity of the likelihood curvature to the noise
//! covariances ([`sensitivity`]), and a Monte Carlo Cramér–Rao bound
//! ([`crb_gain`], reciprocal expected Fisher information with the expectation
//! taken over simulated traces).

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::inverse_tracker::{derive_inverse_params, inverse_kalman_step};
use crate::linalg::{self, gaussian_log_density};
use crate::parallel;
use crate::rng::ensemble_seed;
use crate::statespace::{simulate_engagement, ActionMap, EngagementTrace, GaussianBelief, LinearGaussianModel};
use crate::tracker::kalman_step;

/// Which filter's innovations drive the likelihood.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LikelihoodMode {
    /// From the adversary's observations `y` (forward Kalman filter).
    Classic,
    /// From our states and action measurements (inverse Kalman filter).
    Inverse,
}

/// Log-likelihood of the gain in `model.c()` from our side of the engagement:
/// states and actions only, the adversary's observations are not used.
pub fn loglik_inverse(
    model: &LinearGaussianModel,
    action_map: &ActionMap,
    trace: &EngagementTrace,
) -> Result<f64> {
    let n = trace.horizon();
    if n == 0 {
        return Err(Error::Validation("empty trace".into()));
    }
    let params = derive_inverse_params(model, action_map, n)?;
    let mut belief = GaussianBelief::certain(model.prior_mean().clone());
    let mut acc = 0.0;
    for k in 0..n {
        let step = inverse_kalman_step(&params[k], &belief, &trace.actions[k], &trace.states[k + 1])?;
        acc += gaussian_log_density(&step.innovation, &step.innovation_cov)?;
        belief = step.belief;
    }
    if !acc.is_finite() {
        return Err(Error::Numerical("inverse log-likelihood is not finite".into()));
    }
    Ok(acc)
}

/// Classic innovations log-likelihood of the gain in `model.c()` from the
/// adversary's observations `y_{1:N}`.
pub fn loglik_classic(model: &LinearGaussianModel, trace: &EngagementTrace) -> Result<f64> {
    let n = trace.horizon();
    if n == 0 || trace.observations.is_empty() {
        return Err(Error::Validation("empty trace".into()));
    }
    let mut belief = GaussianBelief::new(model.prior_mean().clone(), model.prior_cov().clone())?;
    let mut acc = 0.0;
    for y in &trace.observations {
        let predicted_mean = model.a() * &belief.mean;
        let innovation = y - model.c() * &predicted_mean;
        let step = kalman_step(model, &belief, y)?;
        acc += gaussian_log_density(&innovation, &step.innovation_cov)?;
        belief = step.posterior;
    }
    if !acc.is_finite() {
        return Err(Error::Numerical("classic log-likelihood is not finite".into()));
    }
    Ok(acc)
}

fn eval_loglik(
    template: &LinearGaussianModel,
    action_map: &ActionMap,
    trace: &EngagementTrace,
    mode: LikelihoodMode,
    theta: f64,
) -> Result<f64> {
    let model = template.with_scalar_gain(theta)?;
    let value = match mode {
        LikelihoodMode::Classic => loglik_classic(&model, trace)?,
        LikelihoodMode::Inverse => loglik_inverse(&model, action_map, trace)?,
    };
    if !value.is_finite() {
        return Err(Error::Numerical(format!("log-likelihood not finite at theta = {theta}")));
    }
    Ok(value)
}

/// A scanned likelihood curve over candidate scalar gains.
#[derive(Debug, Clone, Serialize)]
pub struct LikelihoodCurve {
    /// Strictly increasing grid of candidate gains.
    pub thetas: Vec<f64>,
    pub loglik: Vec<f64>,
    /// Innovations at the best gain found, when requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub innovations_last: Option<Vec<Vec<f64>>>,
}

/// Scalar gain grid `(lo, hi, count)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GainGrid {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct MleResult {
    pub theta_star: f64,
    pub loglik_star: f64,
    pub curve: LikelihoodCurve,
    /// True when the grid scan peaked at an endpoint; the true maximizer may
    /// lie outside the grid.
    pub boundary_hit: bool,
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Maximum-likelihood estimate of a positive scalar gain: grid scan, then
/// golden-section refinement around the best cell to `refine_tol`.
pub fn mle_gain(
    template: &LinearGaussianModel,
    action_map: &ActionMap,
    trace: &EngagementTrace,
    mode: LikelihoodMode,
    grid: GainGrid,
    refine_tol: f64,
) -> Result<MleResult> {
    if !(grid.lo > 0.0) {
        return Err(Error::Validation("grid.lo must be > 0 (gain restricted positive)".into()));
    }
    if grid.hi <= grid.lo || grid.count < 2 {
        return Err(Error::Validation("grid must satisfy hi > lo and count >= 2".into()));
    }
    if refine_tol <= 0.0 {
        return Err(Error::Validation("refine_tol must be > 0".into()));
    }
    let thetas = linalg::linspace(grid.lo, grid.hi, grid.count);
    let loglik = parallel::try_map_indexed(grid.count, |i| {
        eval_loglik(template, action_map, trace, mode, thetas[i])
    })?;

    let mut best = 0usize;
    for i in 1..loglik.len() {
        if loglik[i] > loglik[best] {
            best = i;
        }
    }
    let boundary_hit = best == 0 || best == loglik.len() - 1;

    // Golden-section search on the bracketing cells.
    let mut a = thetas[best.saturating_sub(1)];
    let mut b = thetas[(best + 1).min(thetas.len() - 1)];
    let mut x1 = b - GOLDEN * (b - a);
    let mut x2 = a + GOLDEN * (b - a);
    let mut f1 = eval_loglik(template, action_map, trace, mode, x1)?;
    let mut f2 = eval_loglik(template, action_map, trace, mode, x2)?;
    while b - a > refine_tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + GOLDEN * (b - a);
            f2 = eval_loglik(template, action_map, trace, mode, x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - GOLDEN * (b - a);
            f1 = eval_loglik(template, action_map, trace, mode, x1)?;
        }
    }
    let (mut theta_star, mut loglik_star) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    if loglik[best] > loglik_star {
        theta_star = thetas[best];
        loglik_star = loglik[best];
    }

    let innovations = innovations_at(template, action_map, trace, mode, theta_star)?;
    Ok(MleResult {
        theta_star,
        loglik_star,
        curve: LikelihoodCurve { thetas, loglik, innovations_last: Some(innovations) },
        boundary_hit,
    })
}

fn innovations_at(
    template: &LinearGaussianModel,
    action_map: &ActionMap,
    trace: &EngagementTrace,
    mode: LikelihoodMode,
    theta: f64,
) -> Result<Vec<Vec<f64>>> {
    let model = template.with_scalar_gain(theta)?;
    let n = trace.horizon();
    let mut out = Vec::with_capacity(n);
    match mode {
        LikelihoodMode::Inverse => {
            let params = derive_inverse_params(&model, action_map, n)?;
            let mut belief = GaussianBelief::certain(model.prior_mean().clone());
            for k in 0..n {
                let step =
                    inverse_kalman_step(&params[k], &belief, &trace.actions[k], &trace.states[k + 1])?;
                out.push(step.innovation.iter().copied().collect());
                belief = step.belief;
            }
        }
        LikelihoodMode::Classic => {
            let mut belief = GaussianBelief::new(model.prior_mean().clone(), model.prior_cov().clone())?;
            for y in &trace.observations {
                let innovation = y - model.c() * (model.a() * &belief.mean);
                out.push(innovation.iter().copied().collect());
                belief = kalman_step(&model, &belief, y)?.posterior;
            }
        }
    }
    Ok(out)
}

/// Finite-difference step sizes for [`sensitivity`] and [`crb_gain`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SensitivitySteps {
    pub h_theta: f64,
    pub h_q: f64,
    pub h_r: f64,
}

impl SensitivitySteps {
    /// `h = 1e-3 * max(1, |value|)` for each coordinate.
    pub fn defaults(model: &LinearGaussianModel) -> Self {
        let theta = model.c()[(0, 0)];
        let q = model.q()[(0, 0)];
        let r = model.r()[(0, 0)];
        Self {
            h_theta: 1e-3 * theta.abs().max(1.0),
            h_q: 1e-3 * q.abs().max(1.0),
            h_r: 1e-3 * r.abs().max(1.0),
        }
    }

    fn halved(&self) -> Self {
        Self { h_theta: self.h_theta / 2.0, h_q: self.h_q / 2.0, h_r: self.h_r / 2.0 }
    }
}

/// Sensitivity of the likelihood curvature at the true gain to the noise
/// covariances: `eta_Q = d/dQ (d^2 l / d theta^2)` and the analogous `eta_R`,
/// with `l` averaged over the trace ensemble.
#[derive(Debug, Clone, Serialize)]
pub struct SensitivityReport {
    pub eta_q: f64,
    pub eta_r: f64,
    pub step_sizes: SensitivitySteps,
    pub mode: LikelihoodMode,
    /// False when halving the steps moves either eta by 10% or more.
    pub converged: bool,
}

/// Ensemble-averaged second derivative of the log-likelihood in `theta` at
/// `theta = C` of `model`, by central differences.
fn curvature(
    model: &LinearGaussianModel,
    action_map: &ActionMap,
    traces: &[EngagementTrace],
    mode: LikelihoodMode,
    h: f64,
) -> Result<f64> {
    let theta0 = model.c()[(0, 0)];
    let per_trace = parallel::try_map_indexed(traces.len(), |i| {
        let t = &traces[i];
        let up = eval_loglik(model, action_map, t, mode, theta0 + h)?;
        let mid = eval_loglik(model, action_map, t, mode, theta0)?;
        let dn = eval_loglik(model, action_map, t, mode, theta0 - h)?;
        Ok::<f64, Error>((up - 2.0 * mid + dn) / (h * h))
    })?;
    Ok(linalg::mean(&per_trace))
}

fn etas(
    model: &LinearGaussianModel,
    action_map: &ActionMap,
    traces: &[EngagementTrace],
    mode: LikelihoodMode,
    steps: SensitivitySteps,
) -> Result<(f64, f64)> {
    let q0 = model.q()[(0, 0)];
    let r0 = model.r()[(0, 0)];
    let identity = DMatrix::<f64>::identity(model.state_dim(), model.state_dim());
    let identity_y = DMatrix::<f64>::identity(model.obs_dim(), model.obs_dim());

    let with_q = |dq: f64| model.with_process_cov(model.q() + &identity * dq);
    let with_r = |dr: f64| model.with_obs_cov(model.r() + &identity_y * dr);
    if q0 - steps.h_q < 0.0 || r0 - steps.h_r < 0.0 {
        return Err(Error::Validation(
            "finite-difference step exceeds the covariance magnitude".into(),
        ));
    }

    let d2_q_up = curvature(&with_q(steps.h_q)?, action_map, traces, mode, steps.h_theta)?;
    let d2_q_dn = curvature(&with_q(-steps.h_q)?, action_map, traces, mode, steps.h_theta)?;
    let d2_r_up = curvature(&with_r(steps.h_r)?, action_map, traces, mode, steps.h_theta)?;
    let d2_r_dn = curvature(&with_r(-steps.h_r)?, action_map, traces, mode, steps.h_theta)?;

    Ok((
        (d2_q_up - d2_q_dn) / (2.0 * steps.h_q),
        (d2_r_up - d2_r_dn) / (2.0 * steps.h_r),
    ))
}

/// Mixed third derivatives of the ensemble-averaged log-likelihood,
/// `eta_Q` and `eta_R`, at the gain stored in `model`. The traces are held
/// fixed; the perturbed covariance enters through the likelihood evaluation.
/// A halved-step recomputation sets the `converged` flag rather than failing.
pub fn sensitivity(
    model: &LinearGaussianModel,
    action_map: &ActionMap,
    traces: &[EngagementTrace],
    mode: LikelihoodMode,
    steps: SensitivitySteps,
) -> Result<SensitivityReport> {
    if traces.is_empty() {
        return Err(Error::Validation("sensitivity requires at least one trace".into()));
    }
    let (eta_q, eta_r) = etas(model, action_map, traces, mode, steps)?;
    let (eta_q_half, eta_r_half) = etas(model, action_map, traces, mode, steps.halved())?;
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(1e-12);
    let converged = rel(eta_q, eta_q_half) < 0.1 && rel(eta_r, eta_r_half) < 0.1;
    Ok(SensitivityReport { eta_q, eta_r, step_sizes: steps, mode, converged })
}

/// Monte Carlo Cramér–Rao bound for the scalar gain: the reciprocal of the
/// expected Fisher information `E[-d^2 l / d theta^2]` at the gain stored in
/// `model`, with the expectation over `ensemble_size` simulated traces of
/// length `horizon` and the derivative by central differences.
pub fn crb_gain(
    model: &LinearGaussianModel,
    action_map: &ActionMap,
    mode: LikelihoodMode,
    ensemble_size: usize,
    horizon: usize,
    seed: u64,
) -> Result<f64> {
    if ensemble_size < 100 {
        return Err(Error::Validation(format!(
            "ensemble_size must be >= 100, got {ensemble_size}"
        )));
    }
    let theta0 = model.c()[(0, 0)];
    let h = 1e-3 * theta0.abs().max(1.0);
    let d2 = parallel::try_map_indexed(ensemble_size, |i| {
        let trace = simulate_engagement(model, action_map, horizon, ensemble_seed(seed, i as u64))?;
        let up = eval_loglik(model, action_map, &trace, mode, theta0 + h)?;
        let mid = eval_loglik(model, action_map, &trace, mode, theta0)?;
        let dn = eval_loglik(model, action_map, &trace, mode, theta0 - h)?;
        Ok::<f64, Error>((up - 2.0 * mid + dn) / (h * h))
    })?;
    let fisher = -linalg::mean(&d2);
    if !(fisher.is_finite() && fisher > 0.0) {
        return Err(Error::Numerical(format!(
            "nonpositive Fisher information estimate ({fisher:.3e}); insufficient ensemble or bad steps"
        )));
    }
    Ok(1.0 / fisher)
}

/// The default scalar benchmark used by the identification experiments:
/// `A = 0.9, Q = R = 1, sigma_eps^2 = 1, phi = Identity, prior N(0, 1)`,
/// with the gain supplied by the caller.
pub fn benchmark_model(gain: f64) -> (LinearGaussianModel, ActionMap) {
    (
        LinearGaussianModel::scalar(0.9, gain, 1.0, 1.0, 0.0, 1.0).expect("valid benchmark"),
        ActionMap::identity(1.0).expect("valid action map"),
    )
}

/// Standard horizon for the identification benchmark experiments.
pub const BENCHMARK_HORIZON: usize = 500;
/// Standard ensemble size (number of seeds) for benchmark experiments.
pub const BENCHMARK_SEEDS: usize = 50;
