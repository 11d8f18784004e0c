//! Least-squares scaling fits: `tau = c / N` through the origin, and the
//! log-log slope of `tau` against mean degree.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitModel {
    InverseN,
    LogLogSlope,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFit {
    /// Prefactor: `c` in `tau = c / N`, or `exp(intercept)` for the log-log
    /// model `tau = c * k^slope`.
    pub c: f64,
    pub c_err: f64,
    pub model: FitModel,
    pub slope: Option<f64>,
    pub slope_err: Option<f64>,
    pub n_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingPoint {
    pub n: f64,
    pub tau: f64,
    /// Ensemble spread of `tau`; when every point has a positive value the
    /// fit is weighted by `1 / std^2`.
    pub std: Option<f64>,
}

fn check_points(xs: &[f64], what: &str) -> Result<()> {
    if xs.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need at least 3 points, got {}",
            xs.len()
        )));
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|p| p[0] == p[1]) {
        return Err(Error::InsufficientData(format!(
            "{what} values must be distinct"
        )));
    }
    Ok(())
}

/// Fits `tau = c / N` by (weighted) least squares on `x = 1 / N`.
pub fn fit_scaling(points: &[ScalingPoint]) -> Result<ScalingFit> {
    let ns: Vec<f64> = points.iter().map(|p| p.n).collect();
    check_points(&ns, "N")?;
    if points.iter().any(|p| !(p.n > 0.0) || !p.tau.is_finite()) {
        return Err(Error::invalid("points need N > 0 and finite tau"));
    }
    let weighted = points.iter().all(|p| p.std.is_some_and(|s| s > 0.0));
    let weight = |p: &ScalingPoint| {
        if weighted {
            p.std.unwrap().powi(-2)
        } else {
            1.0
        }
    };

    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for p in points {
        let x = 1.0 / p.n;
        sxx += weight(p) * x * x;
        sxy += weight(p) * x * p.tau;
    }
    let c = sxy / sxx;
    let ssr: f64 = points
        .iter()
        .map(|p| weight(p) * (p.tau - c / p.n).powi(2))
        .sum();
    let dof = (points.len() - 1) as f64;
    Ok(ScalingFit {
        c,
        c_err: (ssr / dof / sxx).sqrt(),
        model: FitModel::InverseN,
        slope: None,
        slope_err: None,
        n_points: points.len(),
    })
}

/// Ordinary least squares of `ln tau` on `ln k`.
pub fn fit_loglog(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.iter().any(|&(k, t)| !(k > 0.0 && t > 0.0)) {
        return Err(Error::invalid(
            "log-log fit needs positive degrees and thresholds",
        ));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    check_points(&xs, "mean degree")?;
    let m = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / m;
    let ybar = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - xbar).powi(2)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - xbar) * (y - ybar))
        .sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let ssr: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let s2 = ssr / (m - 2.0);
    let slope_err = (s2 / sxx).sqrt();
    let intercept_err = (s2 * (1.0 / m + xbar * xbar / sxx)).sqrt();
    let c = intercept.exp();
    Ok(ScalingFit {
        c,
        c_err: c * intercept_err,
        model: FitModel::LogLogSlope,
        slope: Some(slope),
        slope_err: Some(slope_err),
        n_points: points.len(),
    })
}
