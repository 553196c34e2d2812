//! Log–log regression used by every convergence-order check.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    /// `C` in `err ≈ C ε^slope`.
    pub constant: f64,
    /// Root-mean-square residual of the fit in natural-log units.
    pub rms_residual: f64,
    pub eps: Vec<f64>,
    pub errors: Vec<f64>,
}

/// Ordinary least-squares line through `(xs, ys)`: returns (slope, intercept, rms).
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let icpt = my - slope * mx;
    let rms = (xs.iter().zip(ys).map(|(x, y)| (y - icpt - slope * x).powi(2)).sum::<f64>() / n).sqrt();
    (slope, icpt, rms)
}

/// Decades spanned by a list of positive step sizes.
pub fn decades(eps: &[f64]) -> f64 {
    let hi = eps.iter().cloned().fold(f64::MIN, f64::max);
    let lo = eps.iter().cloned().fold(f64::MAX, f64::min);
    (hi / lo).log10()
}

/// Checks an ε list against minimum point count and span.
pub fn require_span(eps: &[f64], min_points: usize, min_decades: f64) -> Result<()> {
    let d = if eps.is_empty() { 0.0 } else { decades(eps) };
    if eps.len() < min_points || d < min_decades - 1e-9 || eps.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::InsufficientDecades { decades: d, points: eps.len() });
    }
    Ok(())
}

/// Fits `err ≈ C ε^p` in log–log coordinates.
pub fn loglog_fit(eps: &[f64], errors: &[f64]) -> SlopeFit {
    let xs: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.max(f64::MIN_POSITIVE).ln()).collect();
    let (slope, icpt, rms) = linear_fit(&xs, &ys);
    SlopeFit { slope, constant: icpt.exp(), rms_residual: rms, eps: eps.to_vec(), errors: errors.to_vec() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_power_law() {
        let eps = [1e-2, 3e-3, 1e-3, 3e-4];
        let err: Vec<f64> = eps.iter().map(|e: &f64| 5.0 * e.powi(3)).collect();
        let f = loglog_fit(&eps, &err);
        assert!((f.slope - 3.0).abs() < 1e-12);
        assert!((f.constant - 5.0).abs() < 1e-9);
        assert!(f.rms_residual < 1e-12);
    }

    #[test]
    fn span_requirements() {
        assert!(require_span(&[1e-2, 1e-3, 1e-4], 3, 1.0).is_ok());
        assert!(matches!(require_span(&[1e-2, 5e-3, 2e-3], 3, 1.0), Err(Error::InsufficientDecades { .. })));
        assert!(require_span(&[1e-2, 1e-3], 3, 1.0).is_err());
    }
}
