//! Weighted least-squares fits of the origin-pass models used throughout
//! the sweeps, efficiency extraction, and crossover location.

use crate::error::{Error, Result};

/// Fit models; every variant passes through the origin, since the measured
/// background is subtracted before fitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitModel {
    /// y = a·x
    Linear,
    /// y = a·x + b·x²
    LinearPlusQuadratic,
    /// y = b·x²
    PureQuadratic,
}

impl FitModel {
    pub fn param_count(&self) -> usize {
        match self {
            FitModel::LinearPlusQuadratic => 2,
            _ => 1,
        }
    }

    /// Basis functions evaluated at x, one per coefficient.
    fn basis(&self, x: f64) -> [f64; 2] {
        match self {
            FitModel::Linear => [x, 0.0],
            FitModel::LinearPlusQuadratic => [x, x * x],
            FitModel::PureQuadratic => [x * x, 0.0],
        }
    }

    pub fn predict(&self, coefficients: &[f64], x: f64) -> f64 {
        let b = self.basis(x);
        coefficients.iter().zip(b).map(|(c, phi)| c * phi).sum()
    }
}

impl std::str::FromStr for FitModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(FitModel::Linear),
            "linear+quadratic" => Ok(FitModel::LinearPlusQuadratic),
            "quadratic" => Ok(FitModel::PureQuadratic),
            other => Err(Error::Config(format!(
                "unknown fit model '{other}' (expected linear, linear+quadratic, quadratic)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub model: FitModel,
    pub coefficients: Vec<f64>,
    /// 1σ uncertainties, √diag of the covariance.
    pub uncertainties: Vec<f64>,
    /// Row-major k×k coefficient covariance (XᵀWX)⁻¹.
    pub covariance: Vec<f64>,
    pub reduced_chi_square: f64,
    pub residuals: Vec<f64>,
}

/// Exact minimizer of Σ((y − model(x))/σ)² by the normal equations; the
/// models are linear in their coefficients. `sigmas = None` fits with unit
/// weights (model-only data).
pub fn fit(xs: &[f64], ys: &[f64], sigmas: Option<&[f64]>, model: FitModel) -> Result<FitResult> {
    let n = xs.len();
    if ys.len() != n || sigmas.is_some_and(|s| s.len() != n) {
        return Err(Error::Shape(format!(
            "got {} x, {} y, {} sigma values",
            n,
            ys.len(),
            sigmas.map_or(n, <[f64]>::len)
        )));
    }
    let k = model.param_count();
    if n < k + 1 {
        return Err(Error::Domain(format!(
            "{k}-parameter fit needs at least {} points, got {n}",
            k + 1
        )));
    }
    if let Some(s) = sigmas {
        if s.iter().any(|&v| !v.is_finite() || v <= 0.0) {
            return Err(Error::Domain("all sigmas must be finite and > 0".into()));
        }
    }
    let weight = |i: usize| sigmas.map_or(1.0, |s| 1.0 / (s[i] * s[i]));

    // normal equations: S·c = b with S = XᵀWX, b = XᵀWy
    let mut s = [0.0; 3]; // s[0] = S11, s[1] = S12 = S21, s[2] = S22
    let mut b = [0.0; 2];
    for i in 0..n {
        let w = weight(i);
        let phi = model.basis(xs[i]);
        s[0] += w * phi[0] * phi[0];
        s[1] += w * phi[0] * phi[1];
        s[2] += w * phi[1] * phi[1];
        b[0] += w * phi[0] * ys[i];
        b[1] += w * phi[1] * ys[i];
    }

    let (coefficients, covariance) = if k == 1 {
        if s[0] <= 0.0 {
            return Err(Error::Rank("design matrix is singular: Σw·φ² = 0".into()));
        }
        (vec![b[0] / s[0]], vec![1.0 / s[0]])
    } else {
        let det = s[0] * s[2] - s[1] * s[1];
        if det <= 1e-14 * s[0] * s[2] || s[0] == 0.0 {
            return Err(Error::Rank(format!(
                "design matrix is singular (det = {det:.3e})"
            )));
        }
        let a = (s[2] * b[0] - s[1] * b[1]) / det;
        let q = (s[0] * b[1] - s[1] * b[0]) / det;
        (
            vec![a, q],
            vec![s[2] / det, -s[1] / det, -s[1] / det, s[0] / det],
        )
    };

    let uncertainties = (0..k).map(|i| covariance[i * k + i].sqrt()).collect();
    let residuals: Vec<f64> =
        (0..n).map(|i| ys[i] - model.predict(&coefficients, xs[i])).collect();
    let chi2: f64 = residuals.iter().enumerate().map(|(i, r)| weight(i) * r * r).sum();
    Ok(FitResult {
        model,
        coefficients,
        uncertainties,
        covariance,
        reduced_chi_square: chi2 / (n - k) as f64,
        residuals,
    })
}

/// Generation efficiency from the linear term of N_SHG = (η/2)·N: η = 2a
/// with uncertainty 2σ_a.
pub fn efficiency_from_fit(result: &FitResult) -> Result<(f64, f64)> {
    match result.model {
        FitModel::Linear | FitModel::LinearPlusQuadratic => {
            Ok((2.0 * result.coefficients[0], 2.0 * result.uncertainties[0]))
        }
        FitModel::PureQuadratic => Err(Error::ModelMismatch(
            "a pure-quadratic fit carries no linear efficiency".into(),
        )),
    }
}

/// All x where the sampled ratio curve crosses 1, by linear interpolation
/// between bracketing grid points.
pub fn find_crossover(xs: &[f64], ratios: &[f64]) -> Result<Vec<f64>> {
    if xs.len() != ratios.len() {
        return Err(Error::Shape(format!(
            "got {} x but {} ratio values",
            xs.len(),
            ratios.len()
        )));
    }
    let mut crossings = Vec::new();
    for i in 0..xs.len().saturating_sub(1) {
        let (d0, d1) = (ratios[i] - 1.0, ratios[i + 1] - 1.0);
        if d0 == 0.0 {
            crossings.push(xs[i]);
        } else if d0 * d1 < 0.0 {
            crossings.push(xs[i] + (xs[i + 1] - xs[i]) * d0 / (d0 - d1));
        }
    }
    if let Some(&last) = ratios.last() {
        if last == 1.0 {
            crossings.push(*xs.last().unwrap());
        }
    }
    if crossings.is_empty() {
        return Err(Error::NotFound(format!(
            "ratio curve never crosses 1 on [{:?}, {:?}]",
            xs.first(),
            xs.last()
        )));
    }
    Ok(crossings)
}

/// Like [`find_crossover`], then polishes each crossing by bisecting the
/// model callback between its bracketing grid points.
pub fn find_crossover_refined<F>(xs: &[f64], ratios: &[f64], model: F) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<f64>,
{
    let coarse = find_crossover(xs, ratios)?;
    let mut refined = Vec::with_capacity(coarse.len());
    for x in coarse {
        let i = match xs.iter().position(|&g| g >= x) {
            Some(0) | None => {
                refined.push(x);
                continue;
            }
            Some(i) => i,
        };
        let (mut lo, mut hi) = (xs[i - 1], xs[i]);
        let mut d_lo = model(lo)? - 1.0;
        if d_lo == 0.0 {
            refined.push(lo);
            continue;
        }
        for _ in 0..80 {
            if (hi - lo).abs() <= 1e-12 * hi.abs() {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let d_mid = model(mid)? - 1.0;
            if d_mid == 0.0 {
                lo = mid;
                hi = mid;
            } else if d_mid * d_lo > 0.0 {
                lo = mid;
                d_lo = d_mid;
            } else {
                hi = mid;
            }
        }
        refined.push(0.5 * (lo + hi));
    }
    Ok(refined)
}
