//! Small statistical helpers: compensated sums, batch-mean ratio estimates,
//! least-squares lines.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// A value with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn new(value: f64, stderr: f64) -> Self {
        Estimate { value, stderr }
    }

    pub fn exact(value: f64) -> Self {
        Estimate { value, stderr: 0.0 }
    }

    pub fn rel_err(&self) -> f64 {
        self.stderr / self.value.abs()
    }

    /// `value - k * stderr <= x` and `x <= value + k * stderr` style checks.
    pub fn at_least(&self, x: f64, k: f64) -> bool {
        self.value + k * self.stderr >= x
    }

    pub fn at_most(&self, x: f64, k: f64) -> bool {
        self.value - k * self.stderr <= x
    }
}

/// Neumaier summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut s = CompensatedSum::default();
    for x in xs {
        s.add(x);
    }
    s.value()
}

/// Mean and standard error of independent samples.
pub fn mean_stderr(xs: &[f64]) -> Estimate {
    let n = xs.len();
    if n == 0 {
        return Estimate::new(f64::NAN, f64::NAN);
    }
    let mean = compensated_sum(xs.iter().copied()) / n as f64;
    if n == 1 {
        return Estimate::new(mean, f64::NAN);
    }
    let var = compensated_sum(xs.iter().map(|x| (x - mean).powi(2))) / (n - 1) as f64;
    Estimate::new(mean, (var / n as f64).sqrt())
}

/// `sum(num) / sum(den)` over batches, with a delta-method standard error
/// that treats each batch as one independent observation.
pub fn ratio_estimate(num: &[f64], den: &[f64]) -> Estimate {
    assert_eq!(num.len(), den.len());
    let k = num.len();
    let sn = compensated_sum(num.iter().copied());
    let sd = compensated_sum(den.iter().copied());
    let r = sn / sd;
    if k < 2 {
        return Estimate::new(r, f64::NAN);
    }
    let ss = compensated_sum(num.iter().zip(den).map(|(n, d)| (n - r * d).powi(2)));
    Estimate::new(r, (ss * k as f64 / (k - 1) as f64).sqrt() / sd)
}

/// Two-sided Student-t quantile for a `level` interval.
pub fn t_quantile(df: f64, level: f64) -> f64 {
    StudentsT::new(0.0, 1.0, df)
        .map(|t| t.inverse_cdf(0.5 + level / 2.0))
        .unwrap_or(f64::INFINITY)
}

/// Ordinary least squares `y = a + b x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub intercept: Estimate,
    pub slope: Estimate,
    pub residual_sd: f64,
    pub n: usize,
}

impl LineFit {
    /// Confidence interval for the slope at `level` (e.g. 0.95).
    pub fn slope_ci(&self, level: f64) -> (f64, f64) {
        let q = t_quantile((self.n - 2) as f64, level);
        (
            self.slope.value - q * self.slope.stderr,
            self.slope.value + q * self.slope.stderr,
        )
    }
}

pub fn least_squares(x: &[f64], y: &[f64]) -> Result<LineFit> {
    let n = x.len();
    if n != y.len() || n < 3 {
        return Err(Error::DegenerateFit(format!("{n} points")));
    }
    let mx = compensated_sum(x.iter().copied()) / n as f64;
    let my = compensated_sum(y.iter().copied()) / n as f64;
    let sxx = compensated_sum(x.iter().map(|a| (a - mx).powi(2)));
    if sxx <= 0.0 {
        return Err(Error::DegenerateFit("all abscissae equal".into()));
    }
    let sxy = compensated_sum(x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)));
    let b = sxy / sxx;
    let a = my - b * mx;
    let sse = compensated_sum(x.iter().zip(y).map(|(u, v)| (v - a - b * u).powi(2)));
    let s2 = sse / (n - 2) as f64;
    Ok(LineFit {
        intercept: Estimate::new(a, (s2 * (1.0 / n as f64 + mx * mx / sxx)).sqrt()),
        slope: Estimate::new(b, (s2 / sxx).sqrt()),
        residual_sd: s2.sqrt(),
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn compensated_sum_keeps_small_terms() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(xs), 2.0);
    }

    #[test]
    fn ratio_of_equal_batches_is_plain_mean() {
        let num = [2.0, 4.0, 6.0];
        let den = [1.0, 1.0, 1.0];
        let r = ratio_estimate(&num, &den);
        let m = mean_stderr(&num);
        assert_abs_diff_eq!(r.value, 4.0);
        // batch formula uses k/(k-1) * sum r^2 / k^2, the usual stderr
        assert_abs_diff_eq!(r.stderr, m.stderr, epsilon = 1e-12);
    }

    #[test]
    fn exact_line() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 - 0.5 * v).collect();
        let f = least_squares(&x, &y).unwrap();
        assert_abs_diff_eq!(f.slope.value, -0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(f.intercept.value, 3.0, epsilon = 1e-12);
        assert!(f.slope.stderr < 1e-12);
        assert!(least_squares(&x[..2], &y[..2]).is_err());
    }

    #[test]
    fn t_quantile_matches_table() {
        assert_abs_diff_eq!(t_quantile(10.0, 0.95), 2.228, epsilon = 1e-3);
    }
}
