//! Log-log regression for scaling experiments.

use crate::error::{Error, Result};
use serde::Serialize;

/// Outcome of fitting `log y = a + b log x` by least squares.
#[derive(Debug, Clone, Serialize)]
pub struct DecayFit {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub predicted_slope: f64,
    /// Root-mean-square residual in log space.
    pub residual: f64,
    /// Half-width of the 95% confidence band on the slope.
    pub slope_band: f64,
}

impl DecayFit {
    pub fn deviation(&self) -> f64 {
        self.slope - self.predicted_slope
    }

    /// Two-sided check `|slope - predicted| <= tol`.
    pub fn matches(&self, tol: f64) -> bool {
        self.deviation().abs() <= tol
    }

    /// Upper-envelope check `slope <= predicted + slack`.
    pub fn within_envelope(&self, slack: f64) -> bool {
        self.slope <= self.predicted_slope + slack
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog(x: &[f64], y: &[f64], predicted_slope: f64) -> Result<DecayFit> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::InvalidArgument("need at least two points to fit a slope".into()));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::Numerical("log-log fit requires positive finite data".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("abscissae are all equal".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let residual = (ss / k).sqrt();
    let slope_band = if lx.len() > 2 {
        use statrs::distribution::{ContinuousCDF, StudentsT};
        let dof = k - 2.0;
        let t = StudentsT::new(0.0, 1.0, dof)
            .map(|d| d.inverse_cdf(0.975))
            .unwrap_or(f64::NAN);
        t * (ss / dof / sxx).sqrt()
    } else {
        f64::INFINITY
    };
    Ok(DecayFit {
        x: x.to_vec(),
        y: y.to_vec(),
        slope,
        intercept,
        predicted_slope,
        residual,
        slope_band,
    })
}

/// Ordinary least-squares line `y = a + b x`; returns `(a, b)`.
pub fn linear(x: &[f64], y: &[f64]) -> (f64, f64) {
    let k = x.len() as f64;
    let mx = x.iter().sum::<f64>() / k;
    let my = y.iter().sum::<f64>() / k;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (my - b * mx, b)
}
