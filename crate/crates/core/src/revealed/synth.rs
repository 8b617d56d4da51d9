//! Synthetic constrained-maximizer responders, for generating datasets whose
//! rationality is known by construction.

use nalgebra::DVector;

use crate::error::{Error, Result};

use super::simplex::{self, LpOutcome};
use super::{BudgetSpec, RPDataset};

/// The ground-truth utility a synthetic responder maximizes.
#[derive(Debug, Clone)]
pub enum TrueUtility {
    /// `U(beta) = sum_i weights_i * ln(beta_i)` (log form of the
    /// Cobb–Douglas utility; same maximizers).
    CobbDouglas { weights: DVector<f64> },
    /// `U(beta) = min_t [u_t + lambda_t * a_t' (beta - b_t)]` over an anchor
    /// set, the same min-of-affine family the Afriat construction produces.
    MinLinear {
        u: Vec<f64>,
        lambda: Vec<f64>,
        anchor_probes: Vec<DVector<f64>>,
        anchor_responses: Vec<DVector<f64>>,
    },
}

impl TrueUtility {
    fn validate(&self, dim: usize) -> Result<()> {
        match self {
            TrueUtility::CobbDouglas { weights } => {
                if weights.len() != dim || weights.iter().any(|w| !(*w > 0.0)) {
                    return Err(Error::Validation("Cobb-Douglas weights must be positive, length m".into()));
                }
            }
            TrueUtility::MinLinear { u, lambda, anchor_probes, anchor_responses } => {
                let k = u.len();
                if k == 0
                    || lambda.len() != k
                    || anchor_probes.len() != k
                    || anchor_responses.len() != k
                {
                    return Err(Error::Validation("MinLinear anchor arrays must share a positive length".into()));
                }
                if lambda.iter().any(|l| !(*l > 0.0)) {
                    return Err(Error::Validation("MinLinear multipliers must be positive".into()));
                }
                for (a, b) in anchor_probes.iter().zip(anchor_responses) {
                    if a.len() != dim || b.len() != dim || a.iter().any(|v| !(*v > 0.0)) {
                        return Err(Error::Validation(
                            "MinLinear anchors must be positive vectors of length m".into(),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    fn eval(&self, beta: &DVector<f64>) -> f64 {
        match self {
            TrueUtility::CobbDouglas { weights } => {
                let mut acc = 0.0;
                for (w, b) in weights.iter().zip(beta.iter()) {
                    if *b <= 0.0 {
                        return f64::NEG_INFINITY;
                    }
                    acc += w * b.ln();
                }
                acc
            }
            TrueUtility::MinLinear { u, lambda, anchor_probes, anchor_responses } => {
                let mut best = f64::INFINITY;
                for t in 0..u.len() {
                    let slack = anchor_probes[t].dot(beta) - anchor_probes[t].dot(&anchor_responses[t]);
                    best = best.min(u[t] + lambda[t] * slack);
                }
                best
            }
        }
    }

    /// Gradient (subgradient at kinks for the min-of-affine form).
    fn gradient(&self, beta: &DVector<f64>) -> DVector<f64> {
        match self {
            TrueUtility::CobbDouglas { weights } => {
                DVector::from_fn(beta.len(), |i, _| weights[i] / beta[i].max(1e-12))
            }
            TrueUtility::MinLinear { u, lambda, anchor_probes, anchor_responses } => {
                let mut best = (f64::INFINITY, 0usize);
                for t in 0..u.len() {
                    let slack = anchor_probes[t].dot(beta) - anchor_probes[t].dot(&anchor_responses[t]);
                    let val = u[t] + lambda[t] * slack;
                    if val < best.0 {
                        best = (val, t);
                    }
                }
                &anchor_probes[best.1] * lambda[best.1]
            }
        }
    }
}

/// Budget function for a raw `(budget, probe)` pair, before dataset
/// canonicalization.
fn budget_g(budget: &BudgetSpec, n: usize, alpha: &DVector<f64>, beta: &DVector<f64>) -> Result<f64> {
    match budget {
        BudgetSpec::Linear { p_star } => Ok(alpha.dot(beta) - p_star),
        BudgetSpec::SinrQuadratic(b) => {
            let p = b.p_builder.build(alpha);
            Ok(super::sinr::sinr_value(&b.q, &p, b.gamma, beta)? - b.delta)
        }
        BudgetSpec::Callable(f) => Ok((f.0)(n, beta)),
    }
}

/// Radial projection onto the budget boundary: the scale `c > 0` with
/// `g(c * beta) = 0`, found by doubling then bisection. Budgets are monotone
/// increasing, so `g(c beta)` is monotone in `c`; `None` when the ray never
/// crosses the boundary.
fn project_to_boundary(
    budget: &BudgetSpec,
    n: usize,
    alpha: &DVector<f64>,
    beta: &DVector<f64>,
) -> Result<Option<DVector<f64>>> {
    if beta.amax() <= 0.0 {
        return Ok(None);
    }
    let g0 = budget_g(budget, n, alpha, &DVector::zeros(beta.len()))?;
    if g0 >= 0.0 {
        return Err(Error::Validation("budget must be strictly feasible at beta = 0".into()));
    }
    let mut hi = 1.0f64;
    let mut g_hi = budget_g(budget, n, alpha, &(beta * hi))?;
    let mut doubles = 0;
    while g_hi < 0.0 {
        hi *= 2.0;
        doubles += 1;
        if doubles > 200 {
            return Ok(None);
        }
        g_hi = budget_g(budget, n, alpha, &(beta * hi))?;
    }
    let mut lo = if doubles == 0 { 0.0 } else { hi / 2.0 };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let g_mid = budget_g(budget, n, alpha, &(beta * mid))?;
        if g_mid < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 * hi.max(1.0) {
            break;
        }
    }
    // Land on the boundary within rounding of the bisection.
    Ok(Some(beta * (0.5 * (lo + hi))))
}

/// Maximize `utility` over the budget set by projected-gradient ascent along
/// the boundary: gradient step, clamp to the positive orthant, radial
/// projection back to `g = 0`, with backtracking on the utility value.
fn ascend_on_boundary(
    budget: &BudgetSpec,
    n: usize,
    alpha: &DVector<f64>,
    utility: &TrueUtility,
) -> Result<DVector<f64>> {
    let m = alpha.len();
    // Feasible boundary start: the all-ones direction, then axis blends.
    let mut start = None;
    let ones = DVector::from_element(m, 1.0);
    if let Some(b) = project_to_boundary(budget, n, alpha, &ones)? {
        start = Some(b);
    } else {
        for i in 0..m {
            let mut dir = DVector::from_element(m, 0.05);
            dir[i] = 1.0;
            if let Some(b) = project_to_boundary(budget, n, alpha, &dir)? {
                start = Some(b);
                break;
            }
        }
    }
    let Some(mut beta) = start else {
        return Err(Error::Indeterminate(format!(
            "no ray from the origin crosses the budget boundary for probe {n}"
        )));
    };

    let mut value = utility.eval(&beta);
    let mut last_improvement = f64::INFINITY;
    for _iter in 0..1000 {
        let grad = utility.gradient(&beta);
        let scale = beta.norm() / grad.norm().max(1e-12);
        let mut eta = 0.5 * scale.max(1e-9);
        let mut improved = false;
        for _ in 0..50 {
            let mut cand = &beta + &grad * eta;
            for v in cand.iter_mut() {
                if *v < 1e-12 {
                    *v = 1e-12;
                }
            }
            if let Some(projected) = project_to_boundary(budget, n, alpha, &cand)? {
                let cand_value = utility.eval(&projected);
                if cand_value > value + 1e-15 {
                    last_improvement = cand_value - value;
                    beta = projected;
                    value = cand_value;
                    improved = true;
                    break;
                }
            }
            eta *= 0.5;
        }
        if !improved {
            // No ascent direction left at the smallest step: converged.
            return Ok(beta);
        }
    }
    if last_improvement > 1e-8 * (1.0 + value.abs()) {
        return Err(Error::Indeterminate(format!(
            "boundary ascent for probe {n} still improving by {last_improvement:.3e} after 1000 \
             iterations (utility {value:.6})"
        )));
    }
    Ok(beta)
}

/// Maximize the min-of-affine utility over a linear budget by LP.
fn min_linear_lp(
    p_star: f64,
    alpha: &DVector<f64>,
    u: &[f64],
    lambda: &[f64],
    anchor_probes: &[DVector<f64>],
    anchor_responses: &[DVector<f64>],
) -> Result<DVector<f64>> {
    let m = alpha.len();
    let k = u.len();
    // Variables: [beta_1..beta_m, z+, z-]; maximize z+ - z-.
    let mut rows = Vec::with_capacity(k + 1);
    let mut rhs = Vec::with_capacity(k + 1);
    for t in 0..k {
        // z - lambda_t a_t' beta <= u_t - lambda_t a_t' b_t
        let mut row = vec![0.0; m + 2];
        for i in 0..m {
            row[i] = -lambda[t] * anchor_probes[t][i];
        }
        row[m] = 1.0;
        row[m + 1] = -1.0;
        rows.push(row);
        rhs.push(u[t] - lambda[t] * anchor_probes[t].dot(&anchor_responses[t]));
    }
    let mut budget_row = vec![0.0; m + 2];
    for i in 0..m {
        budget_row[i] = alpha[i];
    }
    rows.push(budget_row);
    rhs.push(p_star);

    let mut c = vec![0.0; m + 2];
    c[m] = 1.0;
    c[m + 1] = -1.0;
    match simplex::maximize(&c, &rows, &rhs)? {
        LpOutcome::Optimal(sol) => {
            let beta = DVector::from_row_slice(&sol.x[..m]);
            // Sanity: the LP objective is the utility at the returned point.
            let attained = (0..k)
                .map(|t| u[t] + lambda[t] * anchor_probes[t].dot(&(&beta - &anchor_responses[t])))
                .fold(f64::INFINITY, f64::min);
            if (sol.objective - attained).abs() > 1e-6 * (1.0 + attained.abs()) {
                return Err(Error::Indeterminate(format!(
                    "responder LP objective {:.6} disagrees with the utility {attained:.6}",
                    sol.objective
                )));
            }
            Ok(beta)
        }
        LpOutcome::Infeasible => Err(Error::Indeterminate("responder LP infeasible".into())),
        LpOutcome::Unbounded => Err(Error::Indeterminate("responder LP unbounded".into())),
    }
}

/// Generate the responses of a constrained utility maximizer for the given
/// probes, returning the assembled dataset. Responses of monotone utilities
/// exhaust the budget; nonlinear-budget responses land on `g_n = 0` within
/// the dataset's boundary tolerance.
pub fn synth_responder(
    budget: BudgetSpec,
    utility: &TrueUtility,
    probes: Vec<DVector<f64>>,
) -> Result<RPDataset> {
    if probes.is_empty() {
        return Err(Error::Validation("need at least one probe".into()));
    }
    let m = probes[0].len();
    utility.validate(m)?;

    let mut responses = Vec::with_capacity(probes.len());
    for (n, alpha) in probes.iter().enumerate() {
        if alpha.len() != m || alpha.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::Validation(format!("probe {n} must be componentwise > 0")));
        }
        let beta = match (&budget, utility) {
            (BudgetSpec::Linear { p_star }, TrueUtility::CobbDouglas { weights }) => {
                let total: f64 = weights.iter().sum();
                DVector::from_fn(m, |i, _| weights[i] / total * p_star / alpha[i])
            }
            (
                BudgetSpec::Linear { p_star },
                TrueUtility::MinLinear { u, lambda, anchor_probes, anchor_responses },
            ) => min_linear_lp(*p_star, alpha, u, lambda, anchor_probes, anchor_responses)?,
            _ => ascend_on_boundary(&budget, n, alpha, utility)?,
        };
        responses.push(beta);
    }
    RPDataset::new(probes, responses, budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::revealed::{afriat_feasibility, garp_check, PBuilder, SinrBudget};
    use nalgebra::DMatrix;

    fn v(s: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(s)
    }

    #[test]
    fn cobb_douglas_closed_form() {
        // gamma = (1,1), p* = 1, alpha = (1,2) -> beta = (0.5, 0.25).
        let ds = synth_responder(
            BudgetSpec::Linear { p_star: 1.0 },
            &TrueUtility::CobbDouglas { weights: v(&[1.0, 1.0]) },
            vec![v(&[1.0, 2.0])],
        )
        .unwrap();
        assert!((ds.responses()[0][0] - 0.5).abs() < 1e-12);
        assert!((ds.responses()[0][1] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn responder_exhausts_linear_budget() {
        let ds = synth_responder(
            BudgetSpec::Linear { p_star: 3.0 },
            &TrueUtility::CobbDouglas { weights: v(&[2.0, 1.0, 1.0]) },
            vec![v(&[1.0, 0.5, 2.0])],
        )
        .unwrap();
        // Probes are canonicalized to p* = 1.
        let spent = ds.probes()[0].dot(&ds.responses()[0]);
        assert!((spent - 1.0).abs() < 1e-10, "spent {spent}");
    }

    #[test]
    fn generated_linear_datasets_are_rational() {
        for seed in 0..20u64 {
            let mut rng = crate::rng::substream(seed, 61, 0, 0);
            let m = 2 + (seed % 2) as usize;
            let probes: Vec<DVector<f64>> = (0..6)
                .map(|_| DVector::from_fn(m, |_, _| 0.2 + rand::Rng::random::<f64>(&mut rng) * 2.0))
                .collect();
            let weights = DVector::from_fn(m, |_, _| 0.3 + rand::Rng::random::<f64>(&mut rng));
            let ds = synth_responder(
                BudgetSpec::linear(),
                &TrueUtility::CobbDouglas { weights },
                probes,
            )
            .unwrap();
            assert!(garp_check(&ds).unwrap().is_pass(), "seed {seed}");
            assert!(afriat_feasibility(&ds).unwrap().is_rational(), "seed {seed}");
        }
    }

    #[test]
    fn min_linear_responder_is_rational() {
        let anchors_a = vec![v(&[1.0, 1.5]), v(&[1.5, 1.0])];
        let anchors_b = vec![v(&[0.4, 0.4]), v(&[0.4, 0.4])];
        let utility = TrueUtility::MinLinear {
            u: vec![1.0, 1.2],
            lambda: vec![1.0, 0.7],
            anchor_probes: anchors_a,
            anchor_responses: anchors_b,
        };
        let probes = vec![v(&[1.0, 2.0]), v(&[2.0, 1.0]), v(&[1.2, 1.2])];
        let ds = synth_responder(BudgetSpec::linear(), &utility, probes).unwrap();
        assert!(garp_check(&ds).unwrap().is_pass());
        assert!(afriat_feasibility(&ds).unwrap().is_rational());
    }

    #[test]
    fn sinr_budget_responses_sit_on_boundary() {
        let budget = BudgetSpec::SinrQuadratic(SinrBudget {
            q: DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.2]),
            p_builder: PBuilder::negative_coupling(0.3),
            gamma: 1.0,
            delta: 0.2,
        });
        let probes = vec![v(&[0.5, 0.8]), v(&[0.9, 0.4])];
        let ds = synth_responder(
            budget,
            &TrueUtility::CobbDouglas { weights: v(&[1.0, 1.0]) },
            probes,
        )
        .unwrap();
        for t in 0..ds.len() {
            let g = ds.budget_value(t, &ds.responses()[t]).unwrap();
            assert!(g.abs() <= 1e-6, "g = {g}");
        }
    }
}
