//! Two-sample Kolmogorov–Smirnov test and the scaling-limit comparisons
//! built on it.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{purpose, stream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n1: usize,
    pub n2: usize,
}

/// `sup |F_a - F_b|` over the pooled sample.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut a: Vec<f64> = a.to_vec();
    let mut b: Vec<f64> = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Kolmogorov survival function `Q(lambda) = 2 sum (-1)^{k-1} e^{-2 k^2 lambda^2}`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    if lambda < 1.18 {
        // small-lambda form converges faster here
        let y = (-std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda)).exp();
        let s: f64 = (0..20).map(|k| y.powi((2 * k + 1) * (2 * k + 1))).sum();
        let cdf = (2.0 * std::f64::consts::PI).sqrt() / lambda * s;
        return (1.0 - cdf).clamp(0.0, 1.0);
    }
    let mut q = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        q += if k % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * q).clamp(0.0, 1.0)
}

pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidInput("empty sample".into()));
    }
    let d = ks_statistic(a, b);
    let ne = (a.len() * b.len()) as f64 / (a.len() + b.len()) as f64;
    let se = ne.sqrt();
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_q((se + 0.12 + 0.11 / se) * d),
        n1: a.len(),
        n2: b.len(),
    })
}

/// Fixed seed of the simulated reference samples.
pub const REFERENCE_SEED: u64 = 0x5EED_0F_1A11;

/// Draws of `|N(0, kappa1)|`.
pub fn half_normal_reference(kappa1: f64, draws: usize, seed: u64) -> Result<Vec<f64>> {
    let normal = Normal::new(0.0, kappa1.sqrt())
        .map_err(|e| Error::InvalidInput(format!("kappa1 = {kappa1}: {e}")))?;
    let mut rng = stream(seed, purpose::REFERENCE);
    Ok((0..draws).map(|_| normal.sample(&mut rng).abs()).collect())
}

/// Draws of one coordinate of `W_{|B_{kappa2}|}` where `W` is the
/// Brownian limit of the lattice walk (covariance `t I / d`) and `B` an
/// independent standard Brownian motion.
pub fn mixture_reference(kappa2: f64, dim: usize, draws: usize, seed: u64) -> Result<Vec<f64>> {
    if !(kappa2 > 0.0) || dim == 0 {
        return Err(Error::InvalidInput(format!("kappa2 = {kappa2}, d = {dim}")));
    }
    let mut rng = stream(seed, purpose::REFERENCE ^ 0x100);
    let std = Normal::new(0.0, 1.0).unwrap();
    Ok((0..draws)
        .map(|_| {
            let t = (kappa2.sqrt() * std.sample(&mut rng)).abs();
            (t / dim as f64).sqrt() * rng.sample::<f64, _>(std)
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingTest {
    pub quenched: KsResult,
    pub annealed: Option<KsResult>,
}

/// Compare `n^{-1/2} d_G(0, X_n)` with `|N(0, kappa1)|` and, when given,
/// coordinates of `n^{-1/4} X_n` with the simulated annealed mixture.
pub fn scaling_limit_test(
    scaled_distances: &[f64],
    kappa1: f64,
    annealed: Option<(&[f64], f64, usize)>,
    reference_draws: usize,
) -> Result<ScalingTest> {
    let ref_q = half_normal_reference(kappa1, reference_draws, REFERENCE_SEED)?;
    let quenched = ks_two_sample(scaled_distances, &ref_q)?;
    let annealed = match annealed {
        Some((coords, kappa2, dim)) => {
            let r = mixture_reference(kappa2, dim, reference_draws, REFERENCE_SEED)?;
            Some(ks_two_sample(coords, &r)?)
        }
        None => None,
    };
    Ok(ScalingTest { quenched, annealed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identical_and_disjoint_samples() {
        let a = [0.1, 0.5, 0.9, 1.3];
        assert_eq!(ks_statistic(&a, &a), 0.0);
        assert!(ks_two_sample(&a, &a).unwrap().p_value > 0.99);
        let b = [5.0, 6.0, 7.0];
        assert_eq!(ks_statistic(&a, &b), 1.0);
    }

    #[test]
    fn kolmogorov_tail_values() {
        // tabulated: Q(1.36) ~ 0.049, Q(1.63) ~ 0.0098
        assert_abs_diff_eq!(kolmogorov_q(1.36), 0.0494, epsilon = 5e-4);
        assert_abs_diff_eq!(kolmogorov_q(1.63), 0.0098, epsilon = 3e-4);
        // both series agree where they meet
        let a = kolmogorov_q(1.18 - 1e-9);
        let b = kolmogorov_q(1.18 + 1e-9);
        assert_abs_diff_eq!(a, b, epsilon = 1e-8);
        assert_eq!(kolmogorov_q(0.0), 1.0);
    }

    #[test]
    fn same_law_passes() {
        let a = half_normal_reference(2.0, 3000, 1).unwrap();
        let t = scaling_limit_test(&a, 2.0, None, 100_000).unwrap();
        assert!(t.quenched.p_value > 1e-3, "{:?}", t.quenched);
        let wrong = scaling_limit_test(&a, 4.0, None, 100_000).unwrap();
        assert!(wrong.quenched.p_value < 1e-6);
    }

    #[test]
    fn mixture_variance() {
        // E[W^2] = E|B_k| / d = sqrt(2 k / pi) / d
        let r = mixture_reference(3.0, 5, 200_000, 9).unwrap();
        let m2 = r.iter().map(|x| x * x).sum::<f64>() / r.len() as f64;
        let expect = (2.0 * 3.0 / std::f64::consts::PI).sqrt() / 5.0;
        assert_abs_diff_eq!(m2, expect, epsilon = 0.02 * expect);
    }
}
