//! Least-squares fits for the scaling studies.

use serde::{Deserialize, Serialize};

use crate::error::{Result, RippleError};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Standard error of each ordinate, when the caller has one (e.g. from
    /// Monte Carlo); empty otherwise.
    pub point_stderrs: Vec<f64>,
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

/// Least squares of log y against log x; needs >= 4 strictly positive points.
pub fn fit_slope(points: &[(f64, f64)]) -> Result<SlopeFit> {
    fit_slope_with_stderrs(points, &[])
}

pub fn fit_slope_with_stderrs(points: &[(f64, f64)], stderrs: &[f64]) -> Result<SlopeFit> {
    if points.len() < 4 {
        return Err(RippleError::Config(format!(
            "slope fit needs at least 4 points, got {}",
            points.len()
        )));
    }
    if let Some(&(x, y)) = points.iter().find(|&&(x, y)| x <= 0.0 || y <= 0.0) {
        return Err(RippleError::Domain(format!(
            "log-log fit needs positive data, got ({x}, {y})"
        )));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let (slope, intercept, r_squared) = least_squares(&logs);
    let xs = points.iter().map(|p| p.0);
    Ok(SlopeFit {
        slope,
        intercept,
        r_squared,
        point_stderrs: stderrs.to_vec(),
        x_min: xs.clone().fold(f64::INFINITY, f64::min),
        x_max: xs.fold(f64::NEG_INFINITY, f64::max),
        n_points: points.len(),
    })
}

/// Fit y = c * ln x + b (ordinates linear, abscissae logarithmic); used by
/// the energy-divergence study.
pub fn fit_log_linear(points: &[(f64, f64)]) -> Result<SlopeFit> {
    if points.len() < 4 {
        return Err(RippleError::Config(format!(
            "log-linear fit needs at least 4 points, got {}",
            points.len()
        )));
    }
    if let Some(&(x, _)) = points.iter().find(|&&(x, _)| x <= 0.0) {
        return Err(RippleError::Domain(format!(
            "log-linear fit needs positive abscissae, got {x}"
        )));
    }
    let data: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y)).collect();
    let (slope, intercept, r_squared) = least_squares(&data);
    let xs = points.iter().map(|p| p.0);
    Ok(SlopeFit {
        slope,
        intercept,
        r_squared,
        point_stderrs: Vec::new(),
        x_min: xs.clone().fold(f64::INFINITY, f64::min),
        x_max: xs.fold(f64::NEG_INFINITY, f64::max),
        n_points: points.len(),
    })
}

fn least_squares(data: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = data.len() as f64;
    let mean_x = data.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = data.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for &(x, y) in data {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
        syy += (y - mean_y) * (y - mean_y);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = data
        .iter()
        .map(|&(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    (slope, intercept, r_squared)
}
