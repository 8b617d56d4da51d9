//! Shipped experiment presets.

use crate::config::*;

pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
}

/// Stable, ordered preset listing.
pub const PRESETS: &[Preset] = &[
    Preset {
        name: "fig3",
        description: "Classic vs inverse log-likelihood curves of the sensor gain over C in (0,10]",
    },
    Preset {
        name: "table1_pattern",
        description: "Sensitivity of the likelihood curvature to Q and R at true gains 2.5 and 3.5",
    },
    Preset {
        name: "table2_pattern",
        description: "Monte Carlo Cramer-Rao bounds, classic vs inverse, at gains 0.5/1.5/2/3",
    },
    Preset {
        name: "rp_beam",
        description: "Closed-loop beam-allocation dataset with GARP/Afriat rationality analysis",
    },
    Preset {
        name: "rp_sinr",
        description: "SINR-budget waveform dataset with the nonlinear rationality test",
    },
    Preset {
        name: "fig5",
        description: "Chance-constrained interference sweep and optimal magnitudes r*(delta, epsilon)",
    },
];

/// Default seed shared by all presets.
pub const DEFAULT_SEED: u64 = 2024;

fn benchmark_model(gain: f64) -> ModelDef {
    ModelDef::scalar(0.9, gain, 1.0, 1.0, 0.0, 1.0)
}

fn identity_map(action_noise_var: f64) -> ActionMapDef {
    ActionMapDef { phi_kind: PhiKindDef::Identity, action_noise_var }
}

/// Build the named preset's config, or `None` for an unknown name.
pub fn preset_config(name: &str) -> Option<ExperimentConfig> {
    let experiment = match name {
        "fig3" => Experiment::MleGain(MleGainParams {
            model: benchmark_model(2.5),
            action_map: identity_map(1.0),
            horizon: 500,
            grid: GainGridDef { lo: 0.01, hi: 10.0, count: 1000 },
            refine_tol: 1e-3,
        }),
        "table1_pattern" => Experiment::Sensitivity(SensitivityParams {
            model: benchmark_model(2.5),
            action_map: identity_map(1.0),
            horizon: 500,
            gains: vec![2.5, 3.5],
            ensemble_size: 50,
        }),
        "table2_pattern" => Experiment::Crb(CrbParams {
            model: benchmark_model(2.5),
            action_map: identity_map(1.0),
            horizon: 500,
            gains: vec![0.5, 1.5, 2.0, 3.0],
            ensemble_size: 100,
        }),
        "rp_beam" => Experiment::RpLinear(RpLinearParams {
            target_a: 0.95,
            target_c: 1.0,
            target_q: 1.0,
            target_r: 1.0,
            n_targets: 3,
            epochs: 12,
            weights: vec![1.0, 2.0, 1.5],
            maneuver_scale: [0.5, 2.0],
        }),
        "rp_sinr" => Experiment::RpSinr(RpSinrParams {
            dim: 2,
            n_probes: 8,
            q_diag: vec![1.0, 1.2],
            gamma: 1.0,
            delta: 0.2,
            coupling: 0.3,
            weights: vec![1.0, 1.0],
            probe_range: [0.3, 1.5],
        }),
        "fig5" => Experiment::InterferenceDesign(InterferenceDesignParams {
            h_t: vec![vec![[7.0, 0.0], [7.0, 0.0]]],
            h_c: vec![vec![[1.0, 0.0], [1.0, 0.0]]],
            dims: DimsDef { transmitters: 2, receivers: 1, bins: 1 },
            radar_noise_var: 1.0,
            our_noise_var: 0.1,
            probe_shapes: vec![
                vec![vec![[0.2, 0.0], [0.5, 0.0]]],
                vec![vec![[0.4, 0.0], [0.4, 0.0]]],
            ],
            lag: LagDef::Simultaneous,
            deltas: vec![2.8, 3.0, 3.2],
            epsilons: vec![0.2, 0.3],
            mc_samples: 10_000,
            r_grid: RGridDef { lo: 0.0, hi: 60.0, count: 61 },
        }),
        _ => return None,
    };
    Some(ExperimentConfig { experiment, seed: DEFAULT_SEED, output_dir: None })
}
