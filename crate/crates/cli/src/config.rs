//! Experiment configuration schema.
//!
//! Configs are JSON with strict parsing: unknown keys are rejected so a
//! mistyped field can never silently fall back to a default. Every run
//! writes the fully-resolved config back out as `manifest.json`, and a
//! manifest is itself a valid config, so runs replay bit-for-bit.

use std::path::PathBuf;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use radarkit_core::error::{Error, Result};
use radarkit_core::identification::GainGrid;
use radarkit_core::interference::{ChannelDims, MimoChannel, ProbeLag, RGrid};
use radarkit_core::statespace::{ActionMap, LinearGaussianModel, PhiKind};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub experiment: Experiment,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum Experiment {
    InverseKf(InverseKfParams),
    ParticleVsKf(ParticleVsKfParams),
    MleGain(MleGainParams),
    Sensitivity(SensitivityParams),
    Crb(CrbParams),
    RpLinear(RpLinearParams),
    RpSinr(RpSinrParams),
    WaveformOpt(WaveformOptParams),
    InterferenceDesign(InterferenceDesignParams),
}

// --- shared definitions -------------------------------------------------------

/// Row-major real matrix.
pub type MatrixDef = Vec<Vec<f64>>;
/// Row-major complex matrix as `[re, im]` pairs.
pub type ComplexMatrixDef = Vec<Vec<[f64; 2]>>;

pub fn matrix_from_def(name: &str, def: &MatrixDef) -> Result<DMatrix<f64>> {
    let rows = def.len();
    if rows == 0 {
        return Err(Error::Config(format!("{name} must be non-empty")));
    }
    let cols = def[0].len();
    if cols == 0 || def.iter().any(|r| r.len() != cols) {
        return Err(Error::Config(format!("{name} rows must be non-empty and equal length")));
    }
    let flat: Vec<f64> = def.iter().flatten().copied().collect();
    Ok(DMatrix::from_row_slice(rows, cols, &flat))
}

pub fn complex_matrix_from_def(name: &str, def: &ComplexMatrixDef) -> Result<DMatrix<Complex64>> {
    let rows = def.len();
    if rows == 0 {
        return Err(Error::Config(format!("{name} must be non-empty")));
    }
    let cols = def[0].len();
    if cols == 0 || def.iter().any(|r| r.len() != cols) {
        return Err(Error::Config(format!("{name} rows must be non-empty and equal length")));
    }
    let flat: Vec<Complex64> =
        def.iter().flatten().map(|[re, im]| Complex64::new(*re, *im)).collect();
    Ok(DMatrix::from_row_slice(rows, cols, &flat))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDef {
    pub a: MatrixDef,
    pub c: MatrixDef,
    pub q: MatrixDef,
    pub r: MatrixDef,
    pub prior_mean: Vec<f64>,
    pub prior_cov: MatrixDef,
}

impl ModelDef {
    pub fn build(&self) -> Result<LinearGaussianModel> {
        LinearGaussianModel::new(
            matrix_from_def("a", &self.a)?,
            matrix_from_def("c", &self.c)?,
            matrix_from_def("q", &self.q)?,
            matrix_from_def("r", &self.r)?,
            DVector::from_row_slice(&self.prior_mean),
            matrix_from_def("prior_cov", &self.prior_cov)?,
        )
    }

    pub fn scalar(a: f64, c: f64, q: f64, r: f64, prior_mean: f64, prior_cov: f64) -> Self {
        Self {
            a: vec![vec![a]],
            c: vec![vec![c]],
            q: vec![vec![q]],
            r: vec![vec![r]],
            prior_mean: vec![prior_mean],
            prior_cov: vec![vec![prior_cov]],
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionMapDef {
    pub phi_kind: PhiKindDef,
    pub action_noise_var: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiKindDef {
    Identity,
    InverseTraceScaled,
}

impl ActionMapDef {
    pub fn build(&self) -> Result<ActionMap> {
        let kind = match self.phi_kind {
            PhiKindDef::Identity => PhiKind::Identity,
            PhiKindDef::InverseTraceScaled => PhiKind::InverseTraceScaled,
        };
        ActionMap::new(kind, self.action_noise_var)
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainGridDef {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl GainGridDef {
    pub fn build(&self) -> GainGrid {
        GainGrid { lo: self.lo, hi: self.hi, count: self.count }
    }
}

// --- per-kind parameters ------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InverseKfParams {
    pub model: ModelDef,
    pub action_map: ActionMapDef,
    pub horizon: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticleVsKfParams {
    pub model: ModelDef,
    pub action_map: ActionMapDef,
    pub horizon: usize,
    pub particle_count: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MleGainParams {
    /// Model template; its `c` entry is the true gain the trace is simulated
    /// at, and the grid sweeps candidate gains.
    pub model: ModelDef,
    pub action_map: ActionMapDef,
    pub horizon: usize,
    pub grid: GainGridDef,
    pub refine_tol: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensitivityParams {
    pub model: ModelDef,
    pub action_map: ActionMapDef,
    pub horizon: usize,
    /// True gains to analyze (the model's own `c` is replaced per entry).
    pub gains: Vec<f64>,
    pub ensemble_size: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrbParams {
    pub model: ModelDef,
    pub action_map: ActionMapDef,
    pub horizon: usize,
    pub gains: Vec<f64>,
    pub ensemble_size: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RpLinearParams {
    /// Per-target scalar dynamics of the closed-loop beam scenario.
    pub target_a: f64,
    pub target_c: f64,
    pub target_q: f64,
    pub target_r: f64,
    pub n_targets: usize,
    pub epochs: usize,
    /// Cobb-Douglas weights of the synthetic responder (length n_targets).
    pub weights: Vec<f64>,
    pub maneuver_scale: [f64; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RpSinrParams {
    pub dim: usize,
    pub n_probes: usize,
    /// Diagonal of the signal-power form `Q` (length `dim`).
    pub q_diag: Vec<f64>,
    pub gamma: f64,
    pub delta: f64,
    /// Negative off-diagonal coupling of `P(alpha)`.
    pub coupling: f64,
    /// Cobb-Douglas weights of the synthetic responder (length `dim`).
    pub weights: Vec<f64>,
    /// Probe components are drawn log-uniform from this range.
    pub probe_range: [f64; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveformOptParams {
    pub h_t: ComplexMatrixDef,
    pub h_c: ComplexMatrixDef,
    pub radar_noise_var: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterferenceDesignParams {
    pub h_t: ComplexMatrixDef,
    pub h_c: ComplexMatrixDef,
    pub dims: DimsDef,
    pub radar_noise_var: f64,
    pub our_noise_var: f64,
    /// Probe direction matrices, scaled by the magnitude parameter.
    pub probe_shapes: Vec<ComplexMatrixDef>,
    pub lag: LagDef,
    pub deltas: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub mc_samples: usize,
    pub r_grid: RGridDef,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimsDef {
    pub transmitters: usize,
    pub receivers: usize,
    pub bins: usize,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LagDef {
    OneStep,
    Simultaneous,
}

impl LagDef {
    pub fn build(&self) -> ProbeLag {
        match self {
            LagDef::OneStep => ProbeLag::OneStep,
            LagDef::Simultaneous => ProbeLag::Simultaneous,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RGridDef {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl RGridDef {
    pub fn build(&self) -> RGrid {
        RGrid { lo: self.lo, hi: self.hi, count: self.count }
    }
}

impl InterferenceDesignParams {
    pub fn build_channel(&self) -> Result<MimoChannel> {
        MimoChannel::new(
            complex_matrix_from_def("h_t", &self.h_t)?,
            complex_matrix_from_def("h_c", &self.h_c)?,
            self.radar_noise_var,
            self.our_noise_var,
            ChannelDims {
                transmitters: self.dims.transmitters,
                receivers: self.dims.receivers,
                bins: self.dims.bins,
            },
        )
    }

    pub fn build_shapes(&self) -> Result<Vec<DMatrix<Complex64>>> {
        self.probe_shapes
            .iter()
            .enumerate()
            .map(|(i, s)| complex_matrix_from_def(&format!("probe_shapes[{i}]"), s))
            .collect()
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("config parse: {e}")))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
