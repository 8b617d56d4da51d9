//! Chance-constrained interference design.
//!
//! The design problem: choose the smallest interference magnitude such that,
//! with probability at least `1 - epsilon` over our waveform-measurement
//! noise, the SCNR evaluated at the noisy measurement `Y(l) = W*(l) + E_o(l)`
//! stays below the threshold `Delta` at every pulse. The probability is
//! estimated by Monte Carlo with a Wilson 95% interval; feasibility uses the
//! interval's lower bound, trading a little conservatism for a statistically
//! sound returned magnitude.
//!
//! Noise draws are keyed by `(seed, sample, pulse)` only, so every candidate
//! magnitude `r` is evaluated on common random numbers: threshold events nest
//! exactly across `Delta` values, and sweeps in `r` are smooth.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::linspace;
use crate::parallel;
use crate::rng::{domain, substream};

use super::{pulse_state, sample_measurement_noise, scnr, MimoChannel, ProbeLag, ProbePlan};

/// Two-sided 95% normal quantile, for the Wilson score interval.
const Z_95: f64 = 1.959_963_984_540_054;

/// Chance-constraint specification.
#[derive(Debug, Clone, Copy)]
pub struct ChanceSpec {
    /// SCNR upper bound the radar should be held below.
    pub delta: f64,
    /// Maximum failure probability, in `[0, 1)`.
    pub epsilon: f64,
    /// Monte Carlo draws per (pulse, magnitude) evaluation; at least 100.
    pub mc_samples: usize,
    pub seed: u64,
    /// Evaluate the SCNR at `Y / |Y|` instead of at `Y`. Off by default: the
    /// constraint is evaluated at the raw noisy measurement.
    pub normalize_y: bool,
}

impl ChanceSpec {
    pub fn new(delta: f64, epsilon: f64, mc_samples: usize, seed: u64) -> Result<Self> {
        let spec = Self { delta, epsilon, mc_samples, seed, normalize_y: false };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0) {
            return Err(Error::Validation("delta must be > 0".into()));
        }
        if !(0.0..1.0).contains(&self.epsilon) {
            return Err(Error::Validation("epsilon must lie in [0, 1)".into()));
        }
        if self.mc_samples < 100 {
            return Err(Error::Validation("mc_samples must be >= 100".into()));
        }
        Ok(())
    }
}

/// Wilson 95% score interval for `successes / n`; returns
/// `(p_hat, ci_halfwidth)`.
pub(crate) fn wilson_interval(successes: usize, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / nf;
    let radius = Z_95 * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    (p, radius)
}

/// Monte Carlo SCNR samples at pulse `l` (0-based): the SCNR of
/// `Y = W*(l) + E_o` against the pulse's effective clutter channel, one value
/// per draw, in draw order.
pub fn scnr_mc_samples(
    channel: &MimoChannel,
    plan: &ProbePlan,
    spec: &ChanceSpec,
    pulse: usize,
) -> Result<Vec<f64>> {
    spec.validate()?;
    if pulse >= plan.pulses() {
        return Err(Error::Validation(format!(
            "pulse {pulse} out of range for a {}-pulse plan",
            plan.pulses()
        )));
    }
    let (h_c_eff, solution) = pulse_state(channel, plan, pulse)?;
    let real_valued = channel.is_real() && plan.is_real();
    let dim = solution.waveform.len();
    let values = parallel::map_indexed(spec.mc_samples, |i| {
        let mut rng = substream(spec.seed, domain::MC_MEASUREMENT, i as u64, (pulse + 1) as u64);
        let noise = sample_measurement_noise(&mut rng, dim, channel.our_noise_var, real_valued);
        let mut y = &solution.waveform + noise;
        if spec.normalize_y {
            let n = y.norm();
            if n > 0.0 {
                y /= Complex64::new(n, 0.0);
            }
        }
        scnr(channel.h_t(), &h_c_eff, &y, channel.radar_noise_var)
    });
    Ok(values)
}

/// Monte Carlo estimate of
/// `P(SCNR(H_t, H_c(l), Y(l)) <= Delta)` at pulse `l`, with the Wilson 95%
/// half-width.
pub fn chance_probability(
    channel: &MimoChannel,
    plan: &ProbePlan,
    spec: &ChanceSpec,
    pulse: usize,
) -> Result<(f64, f64)> {
    let samples = scnr_mc_samples(channel, plan, spec, pulse)?;
    let successes = samples.iter().filter(|v| **v <= spec.delta).count();
    Ok(wilson_interval(successes, samples.len()))
}

/// Magnitude grid for the one-parameter probe family.
#[derive(Debug, Clone, Copy)]
pub struct RGrid {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

/// One sweep record: pulse-level constraint estimate at magnitude `r` and
/// threshold `delta`.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub r: f64,
    pub delta: f64,
    /// 1-based pulse index.
    pub pulse: usize,
    pub p_hat: f64,
    pub ci_halfwidth: f64,
    /// The radar's re-optimized SCNR at this pulse (no measurement noise).
    pub scnr_max: f64,
}

fn plan_at(shapes: &[DMatrix<Complex64>], lag: ProbeLag, r: f64) -> Result<ProbePlan> {
    ProbePlan::new(shapes.iter().map(|s| s * Complex64::new(r, 0.0)).collect(), lag)
}

/// Sweep the probe magnitude over a grid for several thresholds, reusing the
/// same Monte Carlo draws for every `(r, delta)` cell. Rows are ordered by
/// `(r, delta, pulse)`.
pub fn sweep_interference(
    channel: &MimoChannel,
    shapes: &[DMatrix<Complex64>],
    lag: ProbeLag,
    deltas: &[f64],
    spec: &ChanceSpec,
    grid: RGrid,
) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    if shapes.is_empty() || shapes.iter().any(|s| s.norm_squared() == 0.0) {
        return Err(Error::Validation("probe shapes must be non-empty and nonzero".into()));
    }
    if grid.lo < 0.0 || grid.hi <= grid.lo || grid.count < 2 {
        return Err(Error::Validation("r grid must satisfy 0 <= lo < hi, count >= 2".into()));
    }
    let rs = linspace(grid.lo, grid.hi, grid.count);
    let n_pulses = shapes.len();
    let mut rows = Vec::with_capacity(rs.len() * deltas.len() * n_pulses);
    for &r in &rs {
        let plan = plan_at(shapes, lag, r)?;
        for pulse in 0..n_pulses {
            let samples = scnr_mc_samples(channel, &plan, spec, pulse)?;
            let (_, solution) = pulse_state(channel, &plan, pulse)?;
            for &delta in deltas {
                let successes = samples.iter().filter(|v| **v <= delta).count();
                let (p_hat, ci) = wilson_interval(successes, samples.len());
                rows.push(SweepRow {
                    r,
                    delta,
                    pulse: pulse + 1,
                    p_hat,
                    ci_halfwidth: ci,
                    scnr_max: solution.scnr_max,
                });
            }
        }
    }
    // Reorder to (r, delta, pulse).
    rows.sort_by(|a, b| {
        (a.r, a.delta, a.pulse)
            .partial_cmp(&(b.r, b.delta, b.pulse))
            .expect("finite keys")
    });
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DesignStatus {
    Feasible { r_star: f64 },
    /// No grid magnitude satisfies the constraint at every pulse.
    Infeasible,
}

/// Result of the constrained magnitude search.
#[derive(Debug, Clone)]
pub struct DesignOutcome {
    pub status: DesignStatus,
    /// The designed plan at `r_star` (feasible outcomes only).
    pub plan: Option<ProbePlan>,
    /// Interference signal power of the designed plan.
    pub objective: Option<f64>,
    /// Grid diagnostics at the design threshold.
    pub rows: Vec<SweepRow>,
}

/// Conservative feasibility at magnitude `r`: the Wilson lower bound meets
/// `1 - epsilon` at every pulse.
fn feasible_at(
    channel: &MimoChannel,
    shapes: &[DMatrix<Complex64>],
    lag: ProbeLag,
    spec: &ChanceSpec,
    r: f64,
) -> Result<bool> {
    let plan = plan_at(shapes, lag, r)?;
    for pulse in 0..plan.pulses() {
        let (p_hat, ci) = chance_probability(channel, &plan, spec, pulse)?;
        if p_hat - ci < 1.0 - spec.epsilon {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Find the smallest magnitude `r` in the one-parameter probe family
/// `H_p(l) = r * shape_l` whose chance constraint holds at every pulse:
/// grid scan for the first feasible point, then bisection between the
/// bracketing cells to `1e-3` relative. Infeasibility across the whole grid
/// is a status, not an error.
pub fn design_interference(
    channel: &MimoChannel,
    shapes: &[DMatrix<Complex64>],
    lag: ProbeLag,
    spec: &ChanceSpec,
    grid: RGrid,
) -> Result<DesignOutcome> {
    let rows = sweep_interference(channel, shapes, lag, &[spec.delta], spec, grid)?;
    let rs = linspace(grid.lo, grid.hi, grid.count);
    let n_pulses = shapes.len();

    let grid_feasible = |idx: usize| -> bool {
        let r = rs[idx];
        rows.iter()
            .filter(|row| row.r == r)
            .take(n_pulses)
            .all(|row| row.p_hat - row.ci_halfwidth >= 1.0 - spec.epsilon)
    };

    let Some(first) = (0..rs.len()).find(|&i| grid_feasible(i)) else {
        return Ok(DesignOutcome { status: DesignStatus::Infeasible, plan: None, objective: None, rows });
    };

    let r_star = if first == 0 {
        rs[0]
    } else {
        let mut lo = rs[first - 1];
        let mut hi = rs[first];
        while (hi - lo) > 1e-3 * hi.max(1e-12) {
            let mid = 0.5 * (lo + hi);
            if feasible_at(channel, shapes, lag, spec, mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    };

    let plan = plan_at(shapes, lag, r_star)?;
    let objective = plan.power();
    Ok(DesignOutcome {
        status: DesignStatus::Feasible { r_star },
        plan: Some(plan),
        objective: Some(objective),
        rows,
    })
}
