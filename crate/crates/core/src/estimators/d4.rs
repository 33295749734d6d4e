//! Logarithmic-correction diagnostics: cut-time growth and window coverage.

use serde::{Deserialize, Serialize};

use super::stats::{least_squares, mean_stderr, Estimate};
use crate::error::Result;

/// Default grid of window constants.
pub const LAMBDA_GRID: [f64; 5] = [2.0, 4.0, 8.0, 16.0, 32.0];

/// Coverage needed before a window is declared met.
pub const TARGET_COVERAGE: f64 = 0.95;

/// A quantity with window `[lambda^-1 n^p (ln n)^lo, lambda n^p (ln n)^hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowQuantity {
    /// `mu(B(0, n))`.
    Volume,
    /// `E_0 tau(0, n)`.
    ExitTime,
    /// `max_{m <= n} |X_m|`.
    MaxDisplacement,
    /// `P_0(X_{2n} = 0)`.
    ReturnProbability,
}

impl WindowQuantity {
    pub const ALL: [WindowQuantity; 4] = [
        WindowQuantity::Volume,
        WindowQuantity::ExitTime,
        WindowQuantity::MaxDisplacement,
        WindowQuantity::ReturnProbability,
    ];

    pub fn name(self) -> &'static str {
        match self {
            WindowQuantity::Volume => "volume",
            WindowQuantity::ExitTime => "exit_time",
            WindowQuantity::MaxDisplacement => "max_displacement",
            WindowQuantity::ReturnProbability => "return_probability",
        }
    }

    /// `(p, lower log power, upper log power)`.
    pub fn exponents(self) -> (f64, f64, f64) {
        match self {
            WindowQuantity::Volume => (1.0, 1.0 / 3.0, 0.5),
            WindowQuantity::ExitTime => (2.0, 0.0, 0.5),
            WindowQuantity::MaxDisplacement => (0.25, 1.0 / 24.0, 7.0 / 12.0),
            WindowQuantity::ReturnProbability => (-0.5, -1.5, -1.0 / 6.0),
        }
    }

    pub fn window(self, n: f64, lambda: f64) -> (f64, f64) {
        let (p, lo, hi) = self.exponents();
        let l = n.ln();
        (
            n.powf(p) * l.powf(lo) / lambda,
            lambda * n.powf(p) * l.powf(hi),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowRow {
    pub quantity: WindowQuantity,
    pub n: u64,
    pub lambda: f64,
    pub coverage: f64,
}

/// Coverage of `values` by the window at every grid constant.
pub fn window_coverage(
    quantity: WindowQuantity,
    n: u64,
    values: &[f64],
    grid: &[f64],
) -> Vec<WindowRow> {
    grid.iter()
        .map(|&lambda| {
            let (lo, hi) = quantity.window(n as f64, lambda);
            let inside = values.iter().filter(|&&v| v >= lo && v <= hi).count();
            WindowRow {
                quantity,
                n,
                lambda,
                coverage: if values.is_empty() {
                    0.0
                } else {
                    inside as f64 / values.len() as f64
                },
            }
        })
        .collect()
}

/// Smallest grid constant reaching `target` coverage.
pub fn smallest_lambda(rows: &[WindowRow], target: f64) -> Option<f64> {
    rows.iter()
        .filter(|r| r.coverage >= target)
        .map(|r| r.lambda)
        .reduce(f64::min)
}

/// `T_n` over dyadic `n`, pooled over environments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub n: u64,
    /// `T_n / n`.
    pub linear: Estimate,
    /// `T_n / (n (ln n)^{1/2})`.
    pub log_corrected: Estimate,
    /// Median over environments of `T_n / n`.
    pub linear_median: f64,
    pub environments: usize,
}

/// `cut_times[e]` lists the positive exact cut-times of environment `e` in
/// increasing order; `T_n` is the `n`-th of them. Levels where some
/// environment has fewer than `n` cut-times are dropped.
pub fn cut_time_growth(cut_times: &[Vec<i64>], levels: &[u64]) -> Vec<GrowthRow> {
    levels
        .iter()
        .filter(|&&n| n >= 2 && cut_times.iter().all(|c| c.len() as u64 >= n))
        .map(|&n| {
            let nf = n as f64;
            let lin: Vec<f64> = cut_times
                .iter()
                .map(|c| c[n as usize - 1] as f64 / nf)
                .collect();
            let corr: Vec<f64> = lin.iter().map(|r| r / nf.ln().sqrt()).collect();
            GrowthRow {
                n,
                linear: mean_stderr(&lin),
                log_corrected: mean_stderr(&corr),
                linear_median: median(&lin),
                environments: cut_times.len(),
            }
        })
        .collect()
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// `|last / first - 1|` of a sequence of ratios.
pub fn relative_drift(values: &[f64]) -> f64 {
    match (values.first(), values.last()) {
        (Some(a), Some(b)) => (b / a - 1.0).abs(),
        _ => f64::NAN,
    }
}

/// Drift of a ratio across `[n_0, n_last]` read off a power-law fit,
/// `|(n_last / n_0)^b - 1|` with `b` the slope of `ln value` on `ln n`.
/// Less sensitive to a single noisy endpoint than [`relative_drift`].
pub fn fitted_drift(n: &[u64], values: &[f64]) -> Result<f64> {
    let x: Vec<f64> = n.iter().map(|&k| (k as f64).ln()).collect();
    let y: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let fit = least_squares(&x, &y)?;
    let span = x[x.len() - 1] - x[0];
    Ok(((fit.slope.value * span).exp() - 1.0).abs())
}

/// Drift summaries of [`GrowthRow`]s from level `from` up. They use medians
/// over environments: the ratios converge in probability, while their means
/// are dominated by a few long gaps between cut-times in d = 4.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthSummary {
    pub top_level: u64,
    /// Relative drift of `T_n / n` over the top two levels.
    pub drift_linear_top2: f64,
    pub drift_linear: f64,
    pub drift_log_corrected: f64,
    pub fitted_drift_linear: f64,
    pub fitted_drift_log_corrected: f64,
    pub max_min_top3_log_corrected: f64,
}

/// `None` with fewer than three levels at or above `from`.
pub fn growth_summary(rows: &[GrowthRow], from: u64) -> Option<GrowthSummary> {
    let top: Vec<_> = rows.iter().filter(|r| r.n >= from).collect();
    if top.len() < 3 {
        return None;
    }
    let n: Vec<u64> = top.iter().map(|r| r.n).collect();
    let lin: Vec<f64> = top.iter().map(|r| r.linear_median).collect();
    let log: Vec<f64> = top
        .iter()
        .map(|r| r.linear_median / (r.n as f64).ln().sqrt())
        .collect();
    Some(GrowthSummary {
        top_level: n[n.len() - 1],
        drift_linear_top2: relative_drift(&lin[lin.len() - 2..]),
        drift_linear: relative_drift(&lin),
        drift_log_corrected: relative_drift(&log),
        fitted_drift_linear: fitted_drift(&n, &lin).ok()?,
        fitted_drift_log_corrected: fitted_drift(&n, &log).ok()?,
        max_min_top3_log_corrected: max_min_ratio(&log[log.len() - 3..]),
    })
}

/// `max / min` of a sequence.
pub fn max_min_ratio(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    max / min
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn straight_line_growth_decays_in_log_form() {
        let cuts = vec![(1..=1 << 12).collect::<Vec<i64>>(); 3];
        let rows = cut_time_growth(&cuts, &[16, 256, 4096, 1 << 13]);
        assert_eq!(rows.len(), 3);
        for r in &rows {
            assert_abs_diff_eq!(r.linear.value, 1.0);
            assert_abs_diff_eq!(r.log_corrected.value, 1.0 / (r.n as f64).ln().sqrt());
        }
        assert!(rows[2].log_corrected.value < rows[0].log_corrected.value);
    }

    #[test]
    fn coverage_grows_with_lambda() {
        let n = 1000;
        let centre = (n as f64) * (n as f64).ln().powf(0.4);
        let vals = [centre, centre * 3.0, centre / 5.0, centre * 40.0];
        let rows = window_coverage(WindowQuantity::Volume, n, &vals, &LAMBDA_GRID);
        for w in rows.windows(2) {
            assert!(w[0].coverage <= w[1].coverage);
        }
        assert_eq!(smallest_lambda(&rows, 0.75), Some(8.0));
        assert_eq!(smallest_lambda(&rows, 1.0), None);
    }

    #[test]
    fn drift_helpers() {
        assert_abs_diff_eq!(relative_drift(&[2.0, 3.0, 2.2]), 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(max_min_ratio(&[2.0, 3.0, 1.5]), 2.0);
        // exact power law 2 n^{0.5} over a factor 16 grows fourfold
        let n = [4u64, 8, 16, 32, 64];
        let v: Vec<f64> = n.iter().map(|&k| 2.0 * (k as f64).sqrt()).collect();
        assert_abs_diff_eq!(fitted_drift(&n, &v).unwrap(), 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fitted_drift(&n, &[1.0; 5]).unwrap(), 0.0, epsilon = 1e-12);
    }
}
