//! The adversary's SCNR-maximizing waveform optimizer and our smart
//! interference against it.
//!
//! Frequency-domain MIMO model: at pulse `l` the radar receives
//! `X(l) = H_t W(l) + H_c(l) W(l) + E_r(l)` and transmits the unit-norm
//! waveform maximizing its signal-to-clutter-plus-noise ratio
//!
//! ```text
//! SCNR(H_t, H_c, W) = |H_t W|^2 / E|H_c W + E_r|^2
//!                   = |H_t W|^2 / (|H_c W|^2 + trace(C_r))
//! ```
//!
//! The maximizer solves the generalized Hermitian eigenproblem
//! `H_t' H_t w = lambda (H_c' H_c + sigma_r^2 I) w`. We inject interference
//! into the clutter channel, `H_c(l) = H_c + H_p(l-1)` (or `+ H_p(l)` in
//! simultaneous mode), observe the re-optimized waveform in noise
//! `Y(l) = W*(l) + E_o(l)`, and size the probes so the SCNR evaluated at the
//! noisy observation stays below a threshold with high probability.

mod chance;
mod waveform;

pub use chance::{
    chance_probability, design_interference, scnr_mc_samples, sweep_interference, ChanceSpec,
    DesignOutcome, DesignStatus, RGrid, SweepRow,
};
pub use waveform::{optimal_waveform, WaveformSolution};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::{domain, substream};

/// MIMO dimensions: `I` transmitters, `J` receivers, `K` frequency bins.
/// Channel matrices are `(J*K) x (I*J*K)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChannelDims {
    pub transmitters: usize,
    pub receivers: usize,
    pub bins: usize,
}

impl ChannelDims {
    pub fn rows(&self) -> usize {
        self.receivers * self.bins
    }

    pub fn cols(&self) -> usize {
        self.transmitters * self.receivers * self.bins
    }
}

/// Frequency-domain channel pair and noise powers.
#[derive(Debug, Clone)]
pub struct MimoChannel {
    h_t: DMatrix<Complex64>,
    h_c: DMatrix<Complex64>,
    /// Per-component radar measurement noise power (sigma_r^2 tilde).
    pub radar_noise_var: f64,
    /// Per-component power of our waveform-measurement noise (sigma_o^2 tilde).
    pub our_noise_var: f64,
    pub dims: ChannelDims,
}

impl MimoChannel {
    pub fn new(
        h_t: DMatrix<Complex64>,
        h_c: DMatrix<Complex64>,
        radar_noise_var: f64,
        our_noise_var: f64,
        dims: ChannelDims,
    ) -> Result<Self> {
        let (rows, cols) = (dims.rows(), dims.cols());
        if rows == 0 || cols == 0 {
            return Err(Error::Config("channel dimensions must be positive".into()));
        }
        if h_t.nrows() != rows || h_t.ncols() != cols || h_c.nrows() != rows || h_c.ncols() != cols {
            return Err(Error::Config(format!(
                "channel matrices must be {rows}x{cols} for dims {dims:?}"
            )));
        }
        if !(radar_noise_var > 0.0) {
            return Err(Error::Validation("radar_noise_var must be > 0".into()));
        }
        if !(our_noise_var >= 0.0) {
            return Err(Error::Validation("our_noise_var must be >= 0".into()));
        }
        Ok(Self { h_t, h_c, radar_noise_var, our_noise_var, dims })
    }

    pub fn h_t(&self) -> &DMatrix<Complex64> {
        &self.h_t
    }

    pub fn h_c(&self) -> &DMatrix<Complex64> {
        &self.h_c
    }

    /// True when every entry of both channels is real; then the optimal
    /// waveform is real and our measurement noise is drawn real as well.
    pub fn is_real(&self) -> bool {
        self.h_t.iter().chain(self.h_c.iter()).all(|z| z.im == 0.0)
    }
}

/// When a probe perturbs the clutter channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeLag {
    /// `H_c(l) = H_c + H_p(l-1)`, with no perturbation at the first pulse.
    /// The faithful reading of the closed-loop dynamics; note that under it
    /// the final probe of a plan acts outside the horizon.
    OneStep,
    /// `H_c(l) = H_c + H_p(l)`: every probe binds within the horizon.
    Simultaneous,
}

/// An interference sequence `H_p(1..L)` and its lag convention.
#[derive(Debug, Clone)]
pub struct ProbePlan {
    pub probes: Vec<DMatrix<Complex64>>,
    pub lag: ProbeLag,
}

impl ProbePlan {
    pub fn new(probes: Vec<DMatrix<Complex64>>, lag: ProbeLag) -> Result<Self> {
        if probes.is_empty() {
            return Err(Error::Validation("plan must contain at least one probe".into()));
        }
        Ok(Self { probes, lag })
    }

    pub fn pulses(&self) -> usize {
        self.probes.len()
    }

    /// Effective clutter perturbation at 0-based pulse index `l`.
    fn perturbation(&self, l: usize) -> Option<&DMatrix<Complex64>> {
        match self.lag {
            ProbeLag::OneStep => {
                if l == 0 {
                    None
                } else {
                    self.probes.get(l - 1)
                }
            }
            ProbeLag::Simultaneous => self.probes.get(l),
        }
    }

    /// Total interference signal power `sum_l |H_p(l)|_F^2`.
    pub fn power(&self) -> f64 {
        self.probes.iter().map(|p| p.norm_squared()).sum()
    }

    pub fn is_real(&self) -> bool {
        self.probes.iter().all(|p| p.iter().all(|z| z.im == 0.0))
    }
}

/// `SCNR(H_t, H_c, W) = |H_t W|^2 / (|H_c W|^2 + rows(H_c) * sigma_r^2)`.
/// `W` need not be unit norm: the chance constraint evaluates the same
/// expression at noisy measurements of the waveform.
pub fn scnr(
    h_t: &DMatrix<Complex64>,
    h_c: &DMatrix<Complex64>,
    w: &DVector<Complex64>,
    radar_noise_var: f64,
) -> f64 {
    let signal = (h_t * w).norm_squared();
    let clutter = (h_c * w).norm_squared();
    signal / (clutter + h_c.nrows() as f64 * radar_noise_var)
}

/// One simulated pulse of the closed loop.
#[derive(Debug, Clone)]
pub struct PulseRecord {
    /// Effective clutter channel at this pulse (baseline plus probe).
    pub h_c_eff: DMatrix<Complex64>,
    pub waveform: WaveformSolution,
    /// Our noisy measurement `Y = W* + E_o`.
    pub measurement: DVector<Complex64>,
}

/// Draw our waveform-measurement noise: circular complex Gaussian with
/// per-component power `var`, real Gaussian when the scenario is real.
fn sample_measurement_noise<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    var: f64,
    real_valued: bool,
) -> DVector<Complex64> {
    if var == 0.0 {
        return DVector::from_element(dim, Complex64::new(0.0, 0.0));
    }
    if real_valued {
        let s = var.sqrt();
        DVector::from_fn(dim, |_, _| Complex64::new(s * rng.sample::<f64, _>(StandardNormal), 0.0))
    } else {
        let s = (var / 2.0).sqrt();
        DVector::from_fn(dim, |_, _| {
            Complex64::new(
                s * rng.sample::<f64, _>(StandardNormal),
                s * rng.sample::<f64, _>(StandardNormal),
            )
        })
    }
}

/// Effective clutter channel and optimal waveform at 0-based pulse `l`.
pub(crate) fn pulse_state(
    channel: &MimoChannel,
    plan: &ProbePlan,
    l: usize,
) -> Result<(DMatrix<Complex64>, WaveformSolution)> {
    let h_c_eff = match plan.perturbation(l) {
        Some(p) => {
            if p.nrows() != channel.h_c.nrows() || p.ncols() != channel.h_c.ncols() {
                return Err(Error::Config("probe shape does not match the clutter channel".into()));
            }
            &channel.h_c + p
        }
        None => channel.h_c.clone(),
    };
    let solution = optimal_waveform(&channel.h_t, &h_c_eff, channel.radar_noise_var)?;
    Ok((h_c_eff, solution))
}

/// Simulate the closed loop over the plan's pulses. Deterministic given the
/// seed.
pub fn simulate_pulses(channel: &MimoChannel, plan: &ProbePlan, seed: u64) -> Result<Vec<PulseRecord>> {
    let real_valued = channel.is_real() && plan.is_real();
    let mut out = Vec::with_capacity(plan.pulses());
    for l in 0..plan.pulses() {
        let (h_c_eff, waveform) = pulse_state(channel, plan, l)?;
        let mut rng = substream(seed, domain::PULSE_MEASUREMENT, 0, (l + 1) as u64);
        let noise = sample_measurement_noise(
            &mut rng,
            waveform.waveform.len(),
            channel.our_noise_var,
            real_valued,
        );
        let measurement = &waveform.waveform + noise;
        out.push(PulseRecord { h_c_eff, waveform, measurement });
    }
    Ok(out)
}

/// Real-valued 1x2 channel helper used by the simulation presets:
/// `H_t = [t1 t2]`, `H_c = [c1 c2]` (one receiver, one bin, two transmitters).
pub fn real_channel_1x2(
    h_t: [f64; 2],
    h_c: [f64; 2],
    radar_noise_var: f64,
    our_noise_var: f64,
) -> Result<MimoChannel> {
    let to_c = |v: [f64; 2]| {
        DMatrix::from_row_slice(1, 2, &[Complex64::new(v[0], 0.0), Complex64::new(v[1], 0.0)])
    };
    MimoChannel::new(
        to_c(h_t),
        to_c(h_c),
        radar_noise_var,
        our_noise_var,
        ChannelDims { transmitters: 2, receivers: 1, bins: 1 },
    )
}

/// Real 1x2 probe matrix `[a b]` scaled by `r`.
pub fn real_probe_1x2(shape: [f64; 2], r: f64) -> DMatrix<Complex64> {
    DMatrix::from_row_slice(
        1,
        2,
        &[Complex64::new(shape[0] * r, 0.0), Complex64::new(shape[1] * r, 0.0)],
    )
}
