//! Power-law and log-corrected fits of positive series.

use serde::{Deserialize, Serialize};

use super::stats::{least_squares, Estimate, LineFit};
use crate::error::{Error, Result};

/// Fewest points a fit accepts.
pub const MIN_FIT_POINTS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FitModel {
    /// `a n^p`, both fitted.
    Plain,
    /// `a n^p (ln n)^gamma` with `p` held fixed; `a` and `gamma` fitted.
    LogCorrected { p: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesFit {
    pub model: FitModel,
    /// Fitted `p` (plain) or the fixed `p` (log-corrected, zero stderr).
    pub exponent: Estimate,
    /// Fitted `gamma`; `None` for the plain model.
    pub log_exponent: Option<Estimate>,
    pub log_prefactor: Estimate,
    /// 95% interval for the fitted exponent (`p` or `gamma`).
    pub ci95: (f64, f64),
    pub points: usize,
}

impl SeriesFit {
    /// The fitted coefficient: `p` for the plain model, `gamma` otherwise.
    pub fn fitted(&self) -> Estimate {
        self.log_exponent.unwrap_or(self.exponent)
    }
}

pub fn dimension_fit(n: &[f64], values: &[f64], model: FitModel) -> Result<SeriesFit> {
    if n.len() != values.len() {
        return Err(Error::InvalidInput("series lengths differ".into()));
    }
    if n.len() < MIN_FIT_POINTS {
        return Err(Error::DegenerateFit(format!(
            "{} points, need at least {MIN_FIT_POINTS}",
            n.len()
        )));
    }
    if n.iter().chain(values).any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::DegenerateFit("series must be positive".into()));
    }
    let ln_n: Vec<f64> = n.iter().map(|v| v.ln()).collect();
    let ln_v: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    match model {
        FitModel::Plain => {
            let f = least_squares(&ln_n, &ln_v)?;
            Ok(pack(model, f.slope, None, &f))
        }
        FitModel::LogCorrected { p } => {
            if n.iter().any(|&v| v <= 1.0) {
                return Err(Error::DegenerateFit("log-corrected fit needs n > 1".into()));
            }
            let x: Vec<f64> = ln_n.iter().map(|l| l.ln()).collect();
            let y: Vec<f64> = ln_v.iter().zip(&ln_n).map(|(v, l)| v - p * l).collect();
            let f = least_squares(&x, &y)?;
            Ok(pack(model, Estimate::exact(p), Some(f.slope), &f))
        }
    }
}

fn pack(model: FitModel, exponent: Estimate, gamma: Option<Estimate>, f: &LineFit) -> SeriesFit {
    SeriesFit {
        model,
        exponent,
        log_exponent: gamma,
        log_prefactor: f.intercept,
        ci95: f.slope_ci(0.95),
        points: f.n,
    }
}

/// `d_S = -2p` from a plain fit of `P(X_{2n} = 0)` against `n`.
pub fn spectral_dimension(fit: &SeriesFit) -> Estimate {
    Estimate::new(-2.0 * fit.exponent.value, 2.0 * fit.exponent.stderr)
}

/// `d_W = 2 / p` from a plain fit of the mean squared displacement.
pub fn walk_dimension(fit: &SeriesFit) -> Estimate {
    let p = fit.exponent;
    Estimate::new(2.0 / p.value, 2.0 * p.stderr / (p.value * p.value))
}

/// `2^lo, 2^(lo+1), ..., 2^hi`.
pub fn dyadic(lo: u32, hi: u32) -> Vec<u64> {
    (lo..=hi).map(|k| 1u64 << k).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exact_inverse_square_root() {
        let n: Vec<f64> = dyadic(4, 14).into_iter().map(|v| v as f64).collect();
        let v: Vec<f64> = n.iter().map(|x| x.powf(-0.5)).collect();
        let f = dimension_fit(&n, &v, FitModel::Plain).unwrap();
        let ds = spectral_dimension(&f);
        assert_abs_diff_eq!(ds.value, 1.0, epsilon = 1e-3);
        assert!(ds.stderr < 1e-3);
    }

    #[test]
    fn linear_mean_square_gives_walk_dimension_two() {
        let n: Vec<f64> = dyadic(2, 12).into_iter().map(|v| v as f64).collect();
        let f = dimension_fit(&n, &n, FitModel::Plain).unwrap();
        assert_abs_diff_eq!(walk_dimension(&f).value, 2.0, epsilon = 1e-2);
    }

    #[test]
    fn fewer_than_five_points_is_degenerate() {
        let n = [2.0, 4.0, 8.0, 16.0];
        assert!(matches!(
            dimension_fit(&n, &n, FitModel::Plain),
            Err(Error::DegenerateFit(_))
        ));
    }
}
