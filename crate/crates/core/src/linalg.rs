//! Small dense linear-algebra helpers shared across the filters.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Tolerance for symmetry checks on covariance inputs.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Eigenvalues in `[-PSD_TOL, 0)` are clamped to zero; below that is an error.
pub const PSD_TOL: f64 = 1e-12;

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// Validate that `m` is square, symmetric to [`SYMMETRY_TOL`] and PSD to
/// [`PSD_TOL`]. Returns the symmetrized matrix with tiny negative eigenvalues
/// clamped to zero.
pub fn validate_psd(name: &str, m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if m.nrows() != m.ncols() {
        return Err(Error::Config(format!(
            "{name} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let asym = max_asymmetry(m);
    if asym > SYMMETRY_TOL {
        return Err(Error::Validation(format!(
            "{name} is not symmetric (max asymmetry {asym:.3e})"
        )));
    }
    let sym = symmetrize(m);
    let eig = sym.clone().symmetric_eigen();
    let min_eig = eig.eigenvalues.min();
    if min_eig < -PSD_TOL {
        return Err(Error::Validation(format!(
            "{name} is not PSD (min eigenvalue {min_eig:.3e})"
        )));
    }
    if min_eig < 0.0 {
        let mut vals = eig.eigenvalues.clone();
        for v in vals.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let clamped = &eig.eigenvectors * DMatrix::from_diagonal(&vals) * eig.eigenvectors.transpose();
        return Ok(symmetrize(&clamped));
    }
    Ok(sym)
}

/// Condition number of a symmetric matrix, `|lambda|_max / |lambda|_min`.
/// Returns `f64::INFINITY` for a singular matrix.
pub fn sym_condition_number(m: &DMatrix<f64>) -> f64 {
    let eig = symmetrize(m).symmetric_eigen();
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for &v in eig.eigenvalues.iter() {
        lo = lo.min(v.abs());
        hi = hi.max(v.abs());
    }
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Invert a symmetric positive definite matrix via Cholesky.
pub fn spd_inverse(name: &str, m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    symmetrize(m)
        .cholesky()
        .map(|c| c.inverse())
        .ok_or_else(|| Error::Numerical(format!("{name} is not positive definite")))
}

/// Guarded inverse of an innovation covariance: fails when the condition
/// number exceeds `cond_limit`, carrying the condition estimate.
pub fn innovation_inverse(name: &str, s: &DMatrix<f64>, cond_limit: f64) -> Result<DMatrix<f64>> {
    let cond = sym_condition_number(s);
    if !cond.is_finite() || cond > cond_limit {
        return Err(Error::Numerical(format!(
            "{name} is singular or ill-conditioned (condition estimate {cond:.3e})"
        )));
    }
    spd_inverse(name, s)
}

/// Draw `z ~ N(0, cov)` for a PSD `cov`. Cholesky when it applies, symmetric
/// eigendecomposition with clamped negatives otherwise (rank-deficient and
/// zero covariances are valid inputs here).
pub fn sample_mvn_zero<R: Rng + ?Sized>(rng: &mut R, cov: &DMatrix<f64>) -> Result<DVector<f64>> {
    let n = cov.nrows();
    if cov.ncols() != n || n == 0 {
        return Err(Error::Config("covariance must be square and non-empty".into()));
    }
    let z = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
    if let Some(chol) = cov.clone().cholesky() {
        return Ok(chol.l() * z);
    }
    let eig = symmetrize(cov).symmetric_eigen();
    let min_eig = eig.eigenvalues.min();
    let scale = eig.eigenvalues.amax().max(1.0);
    if min_eig < -PSD_TOL * scale {
        return Err(Error::Validation(format!(
            "covariance is not PSD (min eigenvalue {min_eig:.3e})"
        )));
    }
    let mut a = eig.eigenvectors;
    for i in 0..n {
        let s = eig.eigenvalues[i].max(0.0).sqrt();
        for r in 0..n {
            a[(r, i)] *= s;
        }
    }
    Ok(a * z)
}

/// Log-density of `N(innovation; 0, s)` via Cholesky.
pub fn gaussian_log_density(innovation: &DVector<f64>, s: &DMatrix<f64>) -> Result<f64> {
    let d = innovation.len() as f64;
    let chol = symmetrize(s)
        .cholesky()
        .ok_or_else(|| Error::Numerical("innovation covariance is not positive definite".into()))?;
    let log_det = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    let solved = chol.solve(innovation);
    let quad = innovation.dot(&solved);
    Ok(-0.5 * (d * (2.0 * std::f64::consts::PI).ln() + log_det + quad))
}

/// `count` points evenly spaced over `[lo, hi]`, endpoints included.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (count as f64 - 1.0);
    (0..count).map(|i| lo + step * i as f64).collect()
}

/// Deterministic pairwise summation; order-independent reductions use this so
/// aggregates are stable to within one rounding pattern.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        n => pairwise_sum(&values[..n / 2]) + pairwise_sum(&values[n / 2..]),
    }
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    pairwise_sum(values) / values.len() as f64
}

/// Unbiased sample variance.
pub fn sample_variance(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return f64::NAN;
    }
    let m = mean(values);
    let sq: Vec<f64> = values.iter().map(|v| (v - m) * (v - m)).collect();
    pairwise_sum(&sq) / (n as f64 - 1.0)
}
