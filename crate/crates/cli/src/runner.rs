//! Experiment execution and artifact writing.
//!
//! Each run validates its config, writes `manifest.json` (the fully-resolved
//! config), computes, and writes the kind-specific CSV/JSON artifacts.
//! Floats are written through Rust's shortest-round-trip formatter and all
//! randomness is substream-keyed, so reruns with the same config and seed
//! produce byte-identical files under any worker count.

use std::fs;
use std::path::Path;

use nalgebra::DVector;
use serde::Serialize;

use radarkit_core::error::{Error, Result};
use radarkit_core::identification::{
    crb_gain, mle_gain, sensitivity, LikelihoodMode, SensitivitySteps,
};
use radarkit_core::interference::{
    design_interference, optimal_waveform, sweep_interference, ChanceSpec, DesignStatus,
};
use radarkit_core::inverse_tracker::{inverse_kalman_run, inverse_particle_filter, BeliefDocument};
use radarkit_core::revealed::{
    afriat_feasibility, closed_loop_beam_dataset, garp_check, nonlinear_garp,
    sinr_monotonicity_check, synth_responder, BeamScenario, BudgetSidecar, BudgetSpec,
    GarpVerdict, MonotonicityVerdict, PBuilder, RPDataset, RationalityVerdict, SinrBudget,
    Strictness, TrueUtility,
};
use radarkit_core::rng::{domain, ensemble_seed, substream};
use radarkit_core::statespace::{simulate_engagement, EngagementTrace, LinearGaussianModel};

use crate::config::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Success,
    /// At least one requested interference design was infeasible.
    InfeasibleDesign,
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<()> {
    fs::write(dir.join(name), text)?;
    Ok(())
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(dir, name, &text)
}

/// Execute the experiment, writing artifacts into `out_dir` (created if
/// missing). The resolved config must already carry the final seed and
/// output directory.
pub fn run(config: &ExperimentConfig, out_dir: &Path) -> Result<RunStatus> {
    fs::create_dir_all(out_dir)?;
    // A fresh run owns the error report; drop any stale one.
    let stale = out_dir.join("errors.json");
    if stale.exists() {
        fs::remove_file(stale)?;
    }
    let mut manifest = config.clone();
    manifest.output_dir = Some(out_dir.to_path_buf());
    write_text(out_dir, "manifest.json", &format!("{}\n", manifest.to_json()?))?;

    let seed = config.seed;
    match &config.experiment {
        Experiment::InverseKf(p) => run_inverse_kf(p, seed, out_dir),
        Experiment::ParticleVsKf(p) => run_particle_vs_kf(p, seed, out_dir),
        Experiment::MleGain(p) => run_mle_gain(p, seed, out_dir),
        Experiment::Sensitivity(p) => run_sensitivity(p, seed, out_dir),
        Experiment::Crb(p) => run_crb(p, seed, out_dir),
        Experiment::RpLinear(p) => run_rp_linear(p, seed, out_dir),
        Experiment::RpSinr(p) => run_rp_sinr(p, seed, out_dir),
        Experiment::WaveformOpt(p) => run_waveform_opt(p, out_dir),
        Experiment::InterferenceDesign(p) => run_interference_design(p, seed, out_dir),
    }
}

fn run_inverse_kf(p: &InverseKfParams, seed: u64, dir: &Path) -> Result<RunStatus> {
    let model = p.model.build()?;
    let map = p.action_map.build()?;
    let trace = simulate_engagement(&model, &map, p.horizon, seed)?;
    let beliefs = inverse_kalman_run(&model, &map, &trace)?;
    write_text(dir, "trace.json", &trace.to_json()?)?;
    write_json(dir, "beliefs.json", &BeliefDocument::from_beliefs(&beliefs))?;
    write_text(dir, "trace.csv", &trace.to_csv(Some(&beliefs))?)?;
    Ok(RunStatus::Success)
}

#[derive(Serialize)]
struct ParticleSummary {
    max_abs_mean_diff: f64,
    mean_ess: f64,
    particle_count: usize,
}

fn run_particle_vs_kf(p: &ParticleVsKfParams, seed: u64, dir: &Path) -> Result<RunStatus> {
    let model = p.model.build()?;
    let map = p.action_map.build()?;
    let trace = simulate_engagement(&model, &map, p.horizon, seed)?;
    let kf = inverse_kalman_run(&model, &map, &trace)?;
    let clouds = inverse_particle_filter(&model, &map, &trace, p.particle_count, seed)?;

    let dim = model.state_dim();
    let mut csv = String::from("k");
    for i in 1..=dim {
        csv.push_str(&format!(",kf_mean_{i},pf_mean_{i}"));
    }
    csv.push_str(",ess\n");
    let mut max_diff = 0.0f64;
    let mut ess_acc = 0.0;
    for (k, (b, cloud)) in kf.iter().zip(&clouds).enumerate() {
        let pf_mean = cloud.weighted_mean();
        csv.push_str(&(k + 1).to_string());
        for i in 0..dim {
            csv.push_str(&format!(",{},{}", b.mean[i], pf_mean[i]));
            max_diff = max_diff.max((b.mean[i] - pf_mean[i]).abs());
        }
        csv.push_str(&format!(",{}\n", cloud.ess));
        ess_acc += cloud.ess;
    }
    write_text(dir, "particle_vs_kf.csv", &csv)?;
    write_json(
        dir,
        "summary.json",
        &ParticleSummary {
            max_abs_mean_diff: max_diff,
            mean_ess: ess_acc / clouds.len().max(1) as f64,
            particle_count: p.particle_count,
        },
    )?;
    Ok(RunStatus::Success)
}

#[derive(Serialize)]
struct MleModeReport {
    theta_star: f64,
    loglik_star: f64,
    boundary_hit: bool,
}

#[derive(Serialize)]
struct MleReport {
    true_gain: f64,
    classic: MleModeReport,
    inverse: MleModeReport,
}

fn run_mle_gain(p: &MleGainParams, seed: u64, dir: &Path) -> Result<RunStatus> {
    let model = p.model.build()?;
    let map = p.action_map.build()?;
    let trace = simulate_engagement(&model, &map, p.horizon, seed)?;
    let grid = p.grid.build();
    let classic = mle_gain(&model, &map, &trace, LikelihoodMode::Classic, grid, p.refine_tol)?;
    let inverse = mle_gain(&model, &map, &trace, LikelihoodMode::Inverse, grid, p.refine_tol)?;

    let mut csv = String::from("theta,loglik_classic,loglik_inverse\n");
    for i in 0..classic.curve.thetas.len() {
        csv.push_str(&format!(
            "{},{},{}\n",
            classic.curve.thetas[i], classic.curve.loglik[i], inverse.curve.loglik[i]
        ));
    }
    write_text(dir, "likelihood_curves.csv", &csv)?;
    write_json(
        dir,
        "mle.json",
        &MleReport {
            true_gain: model.c()[(0, 0)],
            classic: MleModeReport {
                theta_star: classic.theta_star,
                loglik_star: classic.loglik_star,
                boundary_hit: classic.boundary_hit,
            },
            inverse: MleModeReport {
                theta_star: inverse.theta_star,
                loglik_star: inverse.loglik_star,
                boundary_hit: inverse.boundary_hit,
            },
        },
    )?;
    Ok(RunStatus::Success)
}

#[derive(Serialize)]
struct SensitivityRow {
    gain: f64,
    mode: LikelihoodMode,
    eta_q: f64,
    eta_r: f64,
    converged: bool,
}

fn run_sensitivity(p: &SensitivityParams, seed: u64, dir: &Path) -> Result<RunStatus> {
    let template = p.model.build()?;
    let map = p.action_map.build()?;
    let mut rows = Vec::new();
    for &gain in &p.gains {
        let model = template.with_scalar_gain(gain)?;
        let traces: Vec<EngagementTrace> = (0..p.ensemble_size)
            .map(|i| simulate_engagement(&model, &map, p.horizon, ensemble_seed(seed, i as u64)))
            .collect::<Result<_>>()?;
        let steps = SensitivitySteps::defaults(&model);
        for mode in [LikelihoodMode::Classic, LikelihoodMode::Inverse] {
            let rep = sensitivity(&model, &map, &traces, mode, steps)?;
            rows.push(SensitivityRow {
                gain,
                mode,
                eta_q: rep.eta_q,
                eta_r: rep.eta_r,
                converged: rep.converged,
            });
        }
    }
    write_json(dir, "sensitivity.json", &rows)?;
    Ok(RunStatus::Success)
}

#[derive(Serialize)]
struct CrbRow {
    gain: f64,
    classic: f64,
    inverse: f64,
    ratio: f64,
}

fn run_crb(p: &CrbParams, seed: u64, dir: &Path) -> Result<RunStatus> {
    let template = p.model.build()?;
    let map = p.action_map.build()?;
    let mut rows = Vec::new();
    for &gain in &p.gains {
        let model = template.with_scalar_gain(gain)?;
        let classic =
            crb_gain(&model, &map, LikelihoodMode::Classic, p.ensemble_size, p.horizon, seed)?;
        let inverse =
            crb_gain(&model, &map, LikelihoodMode::Inverse, p.ensemble_size, p.horizon, seed)?;
        rows.push(CrbRow { gain, classic, inverse, ratio: inverse / classic });
    }
    write_json(dir, "crb.json", &rows)?;
    Ok(RunStatus::Success)
}

#[derive(Serialize)]
struct GarpReport {
    pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    cycle: Option<Vec<usize>>,
}

impl From<&GarpVerdict> for GarpReport {
    fn from(v: &GarpVerdict) -> Self {
        match v {
            GarpVerdict::Pass => GarpReport { pass: true, cycle: None },
            GarpVerdict::Fail { cycle } => GarpReport { pass: false, cycle: Some(cycle.clone()) },
        }
    }
}

#[derive(Serialize)]
struct CertificateReport {
    rational: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    u: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    residual: Option<f64>,
}

fn rationality_artifacts(ds: &RPDataset, dir: &Path) -> Result<()> {
    let verdict = afriat_feasibility(ds)?;
    let report = match &verdict {
        RationalityVerdict::Rational(cert) => CertificateReport {
            rational: true,
            u: Some(cert.u.clone()),
            lambda: Some(cert.lambda.clone()),
            residual: Some(cert.residual(ds)?),
        },
        RationalityVerdict::Irrational => {
            CertificateReport { rational: false, u: None, lambda: None, residual: None }
        }
    };
    write_json(dir, "certificate.json", &report)
}

fn run_rp_linear(p: &RpLinearParams, seed: u64, dir: &Path) -> Result<RunStatus> {
    let target = LinearGaussianModel::scalar(p.target_a, p.target_c, p.target_q, p.target_r, 0.0, 1.0)?;
    let scenario = BeamScenario {
        targets: vec![target; p.n_targets],
        epochs: p.epochs,
        weights: DVector::from_row_slice(&p.weights),
        maneuver_scale: (p.maneuver_scale[0], p.maneuver_scale[1]),
        seed,
    };
    let ds = closed_loop_beam_dataset(&scenario)?;
    write_text(dir, "dataset.csv", &ds.to_csv_string())?;
    write_json(dir, "budget.json", &BudgetSidecar::from_budget(ds.budget())?)?;
    write_json(dir, "garp.json", &GarpReport::from(&garp_check(&ds)?))?;
    rationality_artifacts(&ds, dir)?;
    Ok(RunStatus::Success)
}

#[derive(Serialize)]
struct MonotonicityReport {
    monotone: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<String>,
}

fn run_rp_sinr(p: &RpSinrParams, seed: u64, dir: &Path) -> Result<RunStatus> {
    if p.q_diag.len() != p.dim || p.weights.len() != p.dim {
        return Err(Error::Config("q_diag and weights must have length dim".into()));
    }
    let (lo, hi) = (p.probe_range[0], p.probe_range[1]);
    if !(lo > 0.0 && hi >= lo) {
        return Err(Error::Config("probe_range must satisfy 0 < lo <= hi".into()));
    }
    let probes: Vec<DVector<f64>> = (0..p.n_probes)
        .map(|i| {
            let mut rng = substream(seed, domain::SYNTH_DATA, i as u64, 0);
            DVector::from_fn(p.dim, |_, _| {
                (lo.ln() + (hi.ln() - lo.ln()) * rand::Rng::random::<f64>(&mut rng)).exp()
            })
        })
        .collect();

    let q = nalgebra::DMatrix::from_diagonal(&DVector::from_row_slice(&p.q_diag));
    let p_builder = PBuilder::negative_coupling(p.coupling);
    let p_alphas: Vec<_> = probes.iter().map(|a| p_builder.build(a)).collect();
    let monotone = sinr_monotonicity_check(&q, &p_alphas, Strictness::Verbatim)?;
    write_json(
        dir,
        "monotonicity.json",
        &match &monotone {
            MonotonicityVerdict::Monotone => MonotonicityReport { monotone: true, reason: None },
            MonotonicityVerdict::NotCertified { reason } => {
                MonotonicityReport { monotone: false, reason: Some(reason.clone()) }
            }
        },
    )?;

    let budget = BudgetSpec::SinrQuadratic(SinrBudget {
        q,
        p_builder,
        gamma: p.gamma,
        delta: p.delta,
    });
    let ds = synth_responder(
        budget,
        &TrueUtility::CobbDouglas { weights: DVector::from_row_slice(&p.weights) },
        probes,
    )?;
    write_text(dir, "dataset.csv", &ds.to_csv_string())?;
    write_json(dir, "budget.json", &BudgetSidecar::from_budget(ds.budget())?)?;
    write_json(dir, "garp.json", &GarpReport::from(&nonlinear_garp(&ds)?))?;
    rationality_artifacts(&ds, dir)?;
    Ok(RunStatus::Success)
}

#[derive(Serialize)]
struct WaveformReport {
    waveform: Vec<[f64; 2]>,
    eigenvalue: f64,
    scnr_max: f64,
    degenerate: bool,
}

fn run_waveform_opt(p: &WaveformOptParams, dir: &Path) -> Result<RunStatus> {
    let h_t = complex_matrix_from_def("h_t", &p.h_t)?;
    let h_c = complex_matrix_from_def("h_c", &p.h_c)?;
    let sol = optimal_waveform(&h_t, &h_c, p.radar_noise_var)?;
    write_json(
        dir,
        "waveform.json",
        &WaveformReport {
            waveform: sol.waveform.iter().map(|z| [z.re, z.im]).collect(),
            eigenvalue: sol.eigenvalue,
            scnr_max: sol.scnr_max,
            degenerate: sol.degenerate,
        },
    )?;
    Ok(RunStatus::Success)
}

#[derive(Serialize)]
struct DesignRow {
    delta: f64,
    epsilon: f64,
    feasible: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    r_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    objective: Option<f64>,
}

fn run_interference_design(
    p: &InterferenceDesignParams,
    seed: u64,
    dir: &Path,
) -> Result<RunStatus> {
    let channel = p.build_channel()?;
    let shapes = p.build_shapes()?;
    let lag = p.lag.build();
    if p.deltas.is_empty() || p.epsilons.is_empty() {
        return Err(Error::Config("deltas and epsilons must be non-empty".into()));
    }

    // Sweep (shared Monte Carlo draws across deltas) for the plottable CSV.
    let sweep_spec = ChanceSpec::new(p.deltas[0], p.epsilons[0], p.mc_samples, seed)?;
    let rows = sweep_interference(&channel, &shapes, lag, &p.deltas, &sweep_spec, p.r_grid.build())?;
    let mut csv = String::from("r,delta,pulse,p_hat,ci,scnr_max_per_pulse\n");
    for row in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            row.r, row.delta, row.pulse, row.p_hat, row.ci_halfwidth, row.scnr_max
        ));
    }
    write_text(dir, "interference_sweep.csv", &csv)?;

    // Optimal magnitude per (delta, epsilon).
    let mut designs = Vec::new();
    let mut any_infeasible = false;
    for &delta in &p.deltas {
        for &epsilon in &p.epsilons {
            let spec = ChanceSpec::new(delta, epsilon, p.mc_samples, seed)?;
            let out = design_interference(&channel, &shapes, lag, &spec, p.r_grid.build())?;
            match out.status {
                DesignStatus::Feasible { r_star } => designs.push(DesignRow {
                    delta,
                    epsilon,
                    feasible: true,
                    r_star: Some(r_star),
                    objective: out.objective,
                }),
                DesignStatus::Infeasible => {
                    any_infeasible = true;
                    designs.push(DesignRow {
                        delta,
                        epsilon,
                        feasible: false,
                        r_star: None,
                        objective: None,
                    });
                }
            }
        }
    }
    write_json(dir, "design.json", &designs)?;
    Ok(if any_infeasible { RunStatus::InfeasibleDesign } else { RunStatus::Success })
}
