use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::phase::PhaseProfile;
use crate::error::{Error, Result};

/// Least-squares polynomial fit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    /// Coefficient of the highest-order term (slope `m` or curvature `r`).
    pub coefficient: f64,
    pub coefficient_se: f64,
    /// Lower-order coefficients, constant term first.
    pub intercepts: Vec<f64>,
    pub residual_rms: f64,
    pub n_used: usize,
}

/// Fits `y = c_0 + c_1 x + ... + c_d x^d` by least squares.
pub fn fit_polynomial(x: &[f64], y: &[f64], degree: usize) -> Result<FitResult> {
    let n = x.len().min(y.len());
    let p = degree + 1;
    if n < p {
        return Err(Error::TooFewBins { need: p, found: n });
    }
    // center and scale the abscissa so the normal matrix stays well conditioned
    let mean = x[..n].iter().sum::<f64>() / n as f64;
    let scale = x[..n].iter().map(|v| (v - mean).abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let a = DMatrix::from_fn(n, p, |i, j| ((x[i] - mean) / scale).powi(j as i32));
    let b = DVector::from_column_slice(&y[..n]);
    let svd = a.clone().svd(true, true);
    let c = svd
        .solve(&b, 1e-12)
        .map_err(|e| Error::Parse(format!("least squares failed: {e}")))?;
    let resid = &a * &c - &b;
    let rss = resid.norm_squared();
    let dof = n.saturating_sub(p);
    let sigma2 = if dof > 0 { rss / dof as f64 } else { 0.0 };
    let cov_scaled = (a.transpose() * &a)
        .try_inverse()
        .ok_or_else(|| Error::Parse("singular design matrix".into()))?;

    // map back from the scaled variable u = (x - mean)/scale
    let coeffs = unscale(c.as_slice(), mean, scale);
    let top_se = (sigma2 * cov_scaled[(degree, degree)]).max(0.0).sqrt() / scale.powi(degree as i32);
    Ok(FitResult {
        coefficient: coeffs[degree],
        coefficient_se: top_se,
        intercepts: coeffs[..degree].to_vec(),
        residual_rms: (rss / n as f64).sqrt(),
        n_used: n,
    })
}

/// Expands `sum_j c_j ((x - mean)/scale)^j` into powers of `x`.
fn unscale(c: &[f64], mean: f64, scale: f64) -> Vec<f64> {
    let p = c.len();
    let mut out = vec![0.0; p];
    for (j, cj) in c.iter().enumerate() {
        let f = cj / scale.powi(j as i32);
        // (x - mean)^j = sum_k binom(j,k) x^k (-mean)^(j-k)
        let mut binom = 1.0;
        for (k, o) in out.iter_mut().enumerate().take(j + 1) {
            *o += f * binom * (-mean).powi((j - k) as i32);
            binom = binom * (j - k) as f64 / (k + 1) as f64;
        }
    }
    out
}

/// Straight-line fit; `coefficient` is the slope.
pub fn linear_regression(x: &[f64], y: &[f64]) -> Result<FitResult> {
    fit_polynomial(x, y, 1)
}

/// `phase = m x + c`; returns `m` in rad/mm.
pub fn fit_linear_phase(pp: &PhaseProfile) -> Result<FitResult> {
    fit_polynomial(&pp.x, &pp.phase, 1)
}

/// `phase = r x^2 + b x + c`; returns `r` in rad/mm^2.
pub fn fit_quadratic_phase(pp: &PhaseProfile) -> Result<FitResult> {
    fit_polynomial(&pp.x, &pp.phase, 2)
}
