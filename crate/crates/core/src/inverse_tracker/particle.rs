//! Particle approximation of the general inverse filter.
//!
//! Each particle is a candidate for the adversary's conditional mean
//! `xhat_k`. The proposal samples the adversary's observation
//! `y_{k+1} ~ N(C x_{k+1}, R)` and pushes the particle through the
//! adversary's exact Kalman mean update (its covariance sequence is
//! deterministic, so only the mean is random). Particles are then weighted by
//! the action likelihood `N(a_{k+1}; phi(Sigma_{k+1}) xhat_{k+1},
//! sigma_eps^2 I)`. Weights live in the log domain with max-shift
//! normalization; systematic resampling fires when the effective sample size
//! drops below half the particle count.
//!
//! Per-particle draws are keyed by `(seed, particle, step)` substreams, so the
//! filter output is identical under any worker count.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::parallel;
use crate::rng::{domain, substream};
use crate::statespace::{ActionMap, EngagementTrace, LinearGaussianModel};

use super::{adversary_gain_sequence, check_trace};

/// Resampling fires when `ess < RESAMPLE_THRESHOLD * particle_count`.
pub const RESAMPLE_THRESHOLD: f64 = 0.5;

/// Weighted particle representation of our posterior over `xhat_k`.
#[derive(Debug, Clone)]
pub struct ParticleCloud {
    pub particles: Vec<DVector<f64>>,
    /// Normalized weights (sum to one).
    pub weights: Vec<f64>,
    /// Effective sample size `1 / sum(w_i^2)`, in `[1, count]`.
    pub ess: f64,
}

impl ParticleCloud {
    pub fn weighted_mean(&self) -> DVector<f64> {
        let dim = self.particles[0].len();
        let mut acc = DVector::zeros(dim);
        for (p, w) in self.particles.iter().zip(&self.weights) {
            acc += p * *w;
        }
        acc
    }
}

fn normalized_weights(log_weights: &[f64]) -> Result<(Vec<f64>, f64)> {
    let m = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return Err(Error::Degeneracy(
            "all particle weights underflowed; increase action_noise_var or particle count".into(),
        ));
    }
    let shifted: Vec<f64> = log_weights.iter().map(|lw| (lw - m).exp()).collect();
    let total = linalg::pairwise_sum(&shifted);
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::Degeneracy("particle weight normalization failed".into()));
    }
    let weights: Vec<f64> = shifted.iter().map(|w| w / total).collect();
    let sq: Vec<f64> = weights.iter().map(|w| w * w).collect();
    let ess = 1.0 / linalg::pairwise_sum(&sq);
    Ok((weights, ess))
}

/// Systematic resampling: one uniform, stratified positions `(u + i) / n`.
fn systematic_resample(particles: &[DVector<f64>], weights: &[f64], u: f64) -> Vec<DVector<f64>> {
    let n = particles.len();
    let mut out = Vec::with_capacity(n);
    let mut cum = weights[0];
    let mut j = 0usize;
    for i in 0..n {
        let pos = (u + i as f64) / n as f64;
        while pos > cum && j + 1 < n {
            j += 1;
            cum += weights[j];
        }
        out.push(particles[j].clone());
    }
    out
}

/// Run the inverse particle filter along a trace, returning one weighted
/// cloud per step `k = 1..=N` (post-update, pre-resample).
pub fn inverse_particle_filter(
    model: &LinearGaussianModel,
    action_map: &ActionMap,
    trace: &EngagementTrace,
    particle_count: usize,
    seed: u64,
) -> Result<Vec<ParticleCloud>> {
    if particle_count < 2 {
        return Err(Error::Validation(format!(
            "particle_count must be >= 2, got {particle_count}"
        )));
    }
    if action_map.action_noise_var <= 0.0 {
        return Err(Error::Degeneracy(
            "action likelihood requires action_noise_var > 0; use the inverse Kalman filter for \
             the noiseless channel"
                .into(),
        ));
    }
    let n = check_trace(model, trace)?;
    let gains = adversary_gain_sequence(model, n)?;
    let a = model.a();
    let c = model.c();
    let x_dim = model.state_dim();
    let r_bar = DMatrix::<f64>::identity(x_dim, x_dim) * action_map.action_noise_var;

    // Sigmabar_0 = 0: the adversary's initial estimate is its (our shared)
    // prior mean, known exactly.
    let mut particles: Vec<DVector<f64>> = vec![model.prior_mean().clone(); particle_count];
    let mut log_weights = vec![0.0f64; particle_count];
    let mut clouds = Vec::with_capacity(n);

    for k in 0..n {
        let (psi, cov) = &gains[k];
        let phi = action_map.gain(cov);
        let x_next = &trace.states[k + 1];
        let action = &trace.actions[k];
        let ca_pred = c * a; // C A, reused by every particle
        let cx = c * x_next;

        let step_id = (k + 1) as u64;
        let updates: Vec<Result<(DVector<f64>, f64)>> =
            parallel::map_indexed(particle_count, |i| {
                let mut rng = substream(seed, domain::PF_PROPOSAL, i as u64, step_id);
                let v = linalg::sample_mvn_zero(&mut rng, model.r())?;
                let y = &cx + v;
                let prior = &particles[i];
                let pushed = a * prior + psi * (y - &ca_pred * prior);
                let innovation = action - &phi * &pushed;
                let logw = linalg::gaussian_log_density(&innovation, &r_bar)?;
                Ok((pushed, logw))
            });

        let mut new_particles = Vec::with_capacity(particle_count);
        for (i, upd) in updates.into_iter().enumerate() {
            let (pushed, logw) = upd?;
            new_particles.push(pushed);
            log_weights[i] += logw;
        }
        particles = new_particles;

        let (weights, ess) = normalized_weights(&log_weights)?;
        clouds.push(ParticleCloud { particles: particles.clone(), weights: weights.clone(), ess });

        if ess < RESAMPLE_THRESHOLD * particle_count as f64 {
            let mut rng = substream(seed, domain::PF_RESAMPLE, 0, step_id);
            let u: f64 = rand::Rng::random(&mut rng);
            particles = systematic_resample(&particles, &weights, u);
            log_weights.fill(0.0);
        }
    }

    Ok(clouds)
}
