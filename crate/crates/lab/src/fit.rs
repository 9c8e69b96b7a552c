//! Least-squares power-law fits `y = a xᵇ` on log-log data.

use std::fmt;

use anyhow::{bail, Result};
use statrs::distribution::{ContinuousCDF, StudentsT};

/// `y = a xᵇ` with a two-sided 95% Student-t interval for `b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerLawFit {
    pub a: f64,
    pub b: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_points: usize,
}

impl fmt::Display for PowerLawFit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "exponent b={:.3} ci95=[{:.3},{:.3}] n={}",
            self.b, self.ci_low, self.ci_high, self.n_points
        )
    }
}

/// Ordinary least squares of `ln y` on `ln x`. Needs at least three points,
/// positive finite coordinates and at least two distinct `x`.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    let k = points.len();
    if k < 3 {
        bail!("power-law fit needs at least 3 points, got {k}");
    }
    if let Some(&(x, y)) = points
        .iter()
        .find(|(x, y)| !(x.is_finite() && y.is_finite() && *x > 0.0 && *y > 0.0))
    {
        bail!("power-law fit needs positive finite points, got ({x}, {y})");
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let kf = k as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / kf;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / kf;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if !(sxx > 1e-12 * kf) {
        bail!("power-law fit needs at least two distinct x values");
    }
    let b = sxy / sxx;
    let intercept = my - b * mx;
    let sse: f64 = logs.iter().map(|p| (p.1 - intercept - b * p.0).powi(2)).sum();
    let dof = kf - 2.0;
    let se = (sse / dof / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, dof)?.inverse_cdf(0.975);
    Ok(PowerLawFit {
        a: intercept.exp(),
        b,
        ci_low: b - t * se,
        ci_high: b + t * se,
        n_points: k,
    })
}
