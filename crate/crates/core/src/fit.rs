use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Least-squares power law `y ≈ e^{intercept} x^{exponent}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub exponent: f64,
    pub intercept: f64,
    /// Root mean square of the log residuals.
    pub residual: f64,
    pub range: (f64, f64),
    pub points: usize,
    /// Set when the data did not allow a meaningful fit.
    #[serde(default)]
    pub degenerate: bool,
}

impl SlopeFit {
    pub fn degenerate(points: usize) -> Self {
        Self {
            exponent: f64::NAN,
            intercept: f64::NAN,
            residual: f64::NAN,
            range: (f64::NAN, f64::NAN),
            points,
            degenerate: true,
        }
    }
}

/// Fits `log y` against `log x`. Points with non-positive or non-finite
/// coordinates are skipped.
pub fn fit_log_log(data: &[(f64, f64)]) -> Result<SlopeFit> {
    let pts: Vec<(f64, f64)> = data
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
        .map(|&(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = pts.len();
    if n < 2 {
        return Err(Error::DegenerateFit(n));
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit(n));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let residual =
        (pts.iter().map(|p| (p.1 - intercept - exponent * p.0).powi(2)).sum::<f64>() / nf).sqrt();
    let lo = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min).exp();
    let hi = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max).exp();
    Ok(SlopeFit { exponent, intercept, residual, range: (lo, hi), points: n, degenerate: false })
}
