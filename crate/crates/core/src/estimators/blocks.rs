//! Per-block statistics of two-sided environments and the ergodic
//! constants averaged from them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::{ratio_estimate, Estimate};
use crate::environment::{CutPoints, Environment};
use crate::error::{Error, Result};
use crate::graph::RangeGraph;
use crate::lattice::Sidedness;
use crate::resistance::{ConductanceMode, ConductanceNetwork};
use crate::rng::task_seed;
use crate::walk::{cut_resistance, expected_h1};

/// Statistics of the environment re-rooted at one exact cut-point `C_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockSample {
    /// `T_{k+1} - T_k`.
    pub duration: u64,
    /// Graph distance from `C_k` to `C_{k+1}`.
    pub distance: u32,
    /// Resistance from `C_k` to `C_{k+1}`.
    pub resistance: f64,
    pub degree: u32,
    /// Vertex weight at `C_k`: the degree, or the crossing total.
    pub weight: f64,
    /// Expected time to the next visit of a cut-point, from `C_k`.
    pub eh1: f64,
}

impl BlockSample {
    /// `1 <= R <= d <= T` and `E H_1 >= 1`, with a little floating slack.
    pub fn is_consistent(&self, dim: usize) -> bool {
        let eps = 1e-9;
        self.resistance >= 1.0 - eps
            && self.resistance <= self.distance as f64 + eps
            && self.distance as u64 <= self.duration
            && self.degree >= 2
            && self.degree as usize <= 2 * dim
            && self.eh1 >= 1.0 - eps
    }
}

/// Graph distance between the cut-points of block `k`, searching inside
/// the block only (cut-points separate it from the rest).
fn block_distance(g: &RangeGraph, cuts: &CutPoints, k: i64) -> Result<u32> {
    let region = cuts.block(g, k)?;
    let (a, b) = (cuts.vertex(k)?, cuts.vertex(k + 1)?);
    let mut dist = rustc_hash::FxHashMap::default();
    for &v in &region {
        dist.insert(v, u32::MAX);
    }
    dist.insert(a, 0);
    let mut queue = std::collections::VecDeque::from([a]);
    while let Some(v) = queue.pop_front() {
        let dv = dist[&v];
        if v == b {
            return Ok(dv);
        }
        for &w in g.neighbors(v) {
            if let Some(dw) = dist.get_mut(&w) {
                if *dw == u32::MAX {
                    *dw = dv + 1;
                    queue.push_back(w);
                }
            }
        }
    }
    Err(Error::InvalidInput(
        "block cut-points are disconnected".into(),
    ))
}

/// One sample per cut index `k` with `C_{k-1}` and `C_{k+1}` both exact.
pub fn environment_blocks(env: &Environment, mode: ConductanceMode) -> Result<Vec<BlockSample>> {
    if env.path.sided() != Sidedness::TwoSided {
        return Err(Error::InvalidInput(
            "block samples need a two-sided environment".into(),
        ));
    }
    let g = &env.graph;
    let net = ConductanceNetwork::with_mode(g, mode);
    let cuts = &env.cut_points;
    let (lo, hi) = cuts.index_range();
    if hi - lo < 2 {
        return Err(Error::InsufficientCutTimes {
            found: cuts.len(),
            needed: 3,
        });
    }
    // block resistances are reused by neighbouring anchors
    let resist: Vec<f64> = (lo..hi)
        .map(|k| cut_resistance(&net, cuts, k))
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity((hi - lo - 1) as usize);
    for k in lo + 1..hi {
        let c = cuts.vertex(k)?;
        out.push(BlockSample {
            duration: (cuts.time(k + 1)? - cuts.time(k)?) as u64,
            distance: block_distance(g, cuts, k)?,
            resistance: resist[(k - lo) as usize],
            degree: g.degree(c),
            weight: net.weight(c),
            eh1: expected_h1(&net, cuts, k)?,
        });
    }
    Ok(out)
}

/// Block samples grouped by environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSampleSet {
    pub dim: usize,
    pub mode: ConductanceMode,
    pub per_env: Vec<Vec<BlockSample>>,
}

impl BlockSampleSet {
    pub fn num_blocks(&self) -> usize {
        self.per_env.iter().map(|b| b.len()).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = &BlockSample> {
        self.per_env.iter().flatten()
    }

    /// The first `n` environments.
    pub fn truncated(&self, n: usize) -> Self {
        BlockSampleSet {
            dim: self.dim,
            mode: self.mode,
            per_env: self.per_env[..n.min(self.per_env.len())].to_vec(),
        }
    }
}

/// Two-sided environments `0..n_envs` (each walk of `horizon` steps per
/// side) seeded from `seed`, sampled in parallel on the current rayon pool.
pub fn sample_blocks(
    dim: usize,
    n_envs: usize,
    horizon: u64,
    seed: u64,
    mode: ConductanceMode,
) -> Result<BlockSampleSet> {
    if dim < 5 {
        return Err(Error::InvalidInput("block constants require d ≥ 5".into()));
    }
    let per_env = (0..n_envs as u64)
        .into_par_iter()
        .map(|e| {
            let env = generate_two_sided(dim, horizon, task_seed(seed, e))?;
            environment_blocks(&env, mode)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BlockSampleSet { dim, mode, per_env })
}

/// Two-sided environment with cut-times on both sides of the origin and at
/// least three cut-points. Rare paths whose far future crosses the past near
/// the origin are extended (same seed) until that holds.
fn generate_two_sided(dim: usize, horizon: u64, seed: u64) -> Result<Environment> {
    let mut h = horizon;
    loop {
        let err = match Environment::generate(dim, h, seed, Sidedness::TwoSided) {
            Ok(env) => {
                let (lo, hi) = env.cut_points.index_range();
                if hi - lo >= 2 {
                    return Ok(env);
                }
                Error::InsufficientCutTimes {
                    found: env.cut_points.len(),
                    needed: 3,
                }
            }
            Err(e @ Error::InsufficientCutTimes { .. }) => e,
            Err(e) => return Err(e),
        };
        if h >= horizon.saturating_mul(64) {
            return Err(err);
        }
        h *= 2;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantEstimates {
    pub tau: Estimate,
    pub delta: Estimate,
    pub rho: Estimate,
    pub nu: Estimate,
    pub eta: Estimate,
    pub kappa1: Estimate,
    pub kappa2: Estimate,
}

impl ConstantEstimates {
    pub fn from_samples(set: &BlockSampleSet) -> Result<Self> {
        if set.per_env.iter().filter(|b| !b.is_empty()).count() < 2 {
            return Err(Error::InsufficientCutTimes {
                found: set.num_blocks(),
                needed: 2,
            });
        }
        let count: Vec<f64> = set.per_env.iter().map(|b| b.len() as f64).collect();
        let sum = |f: &dyn Fn(&BlockSample) -> f64| -> Vec<f64> {
            set.per_env.iter().map(|b| b.iter().map(f).sum()).collect()
        };
        let tau = ratio_estimate(&sum(&|b| b.duration as f64), &count);
        let delta = ratio_estimate(&sum(&|b| b.distance as f64), &count);
        let rho = ratio_estimate(&sum(&|b| b.resistance), &count);
        let w = ratio_estimate(&sum(&|b| b.weight), &count);
        let nu = Estimate::new(w.value / 2.0, w.stderr / 2.0);
        let eta = ratio_estimate(&sum(&|b| b.weight * b.eh1), &sum(&|b| b.weight));
        let (kappa1, kappa2) = kappa(tau, delta, rho, nu, eta);
        Ok(ConstantEstimates {
            tau,
            delta,
            rho,
            nu,
            eta,
            kappa1,
            kappa2,
        })
    }

    /// The provable orderings, each allowed `k` standard errors of slack:
    /// `1 <= rho <= delta <= tau`, `1 <= nu <= tau`, `1 <= eta <= 1 + 4 d tau / nu`.
    pub fn ordering_violations(&self, dim: usize, k: f64) -> Vec<String> {
        let mut bad = Vec::new();
        let mut le = |name: &str, a: Estimate, b: Estimate| {
            let slack = k * (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
            if a.value > b.value + slack {
                bad.push(format!("{name}: {} > {}", a.value, b.value));
            }
        };
        let one = Estimate::exact(1.0);
        le("1 <= rho", one, self.rho);
        le("rho <= delta", self.rho, self.delta);
        le("delta <= tau", self.delta, self.tau);
        le("1 <= nu", one, self.nu);
        le("nu <= tau", self.nu, self.tau);
        le("1 <= eta", one, self.eta);
        let r = self.tau.value / self.nu.value;
        let bound = Estimate::new(
            1.0 + 4.0 * dim as f64 * r,
            4.0 * dim as f64 * r * (self.tau.rel_err().powi(2) + self.nu.rel_err().powi(2)).sqrt(),
        );
        le("eta <= 1 + 4d tau/nu", self.eta, bound);
        bad
    }
}

/// `kappa1 = delta^2 / (nu rho eta)` and `kappa2 = tau^2 / (nu rho eta)`,
/// with first-order error propagation treating the inputs as independent.
pub fn kappa(
    tau: Estimate,
    delta: Estimate,
    rho: Estimate,
    nu: Estimate,
    eta: Estimate,
) -> (Estimate, Estimate) {
    let denom = nu.value * rho.value * eta.value;
    let common = nu.rel_err().powi(2) + rho.rel_err().powi(2) + eta.rel_err().powi(2);
    let k1 = delta.value.powi(2) / denom;
    let k2 = tau.value.powi(2) / denom;
    let e1 = k1 * (4.0 * delta.rel_err().powi(2) + common).sqrt();
    let e2 = k2 * (4.0 * tau.rel_err().powi(2) + common).sqrt();
    (Estimate::new(k1, e1), Estimate::new(k2, e2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Step, WalkPath};
    use approx::assert_abs_diff_eq;

    #[test]
    fn kappa_arithmetic() {
        let one = Estimate::exact(1.0);
        let (k1, k2) = kappa(one, one, one, one, one);
        assert_eq!((k1.value, k2.value), (1.0, 1.0));
        let (k1, k2) = kappa(Estimate::exact(2.0), one, one, one, one);
        assert_eq!((k1.value, k2.value), (1.0, 4.0));
    }

    #[test]
    fn kappa_ratio_identity() {
        let e = |v: f64| Estimate::new(v, 0.01 * v);
        let (tau, delta) = (e(3.7), e(2.2));
        let (k1, k2) = kappa(tau, delta, e(1.6), e(1.4), e(2.9));
        assert_abs_diff_eq!(k2.value / k1.value, (3.7f64 / 2.2).powi(2), epsilon = 1e-12);
    }

    #[test]
    fn straight_line_blocks_are_unit() {
        let f = vec![Step::new(0, false); 40];
        let b = vec![Step::new(0, true); 40];
        let env = Environment::from_path(WalkPath::two_sided(1, &f, &b).unwrap(), 0.1).unwrap();
        let blocks = environment_blocks(&env, ConductanceMode::Unit).unwrap();
        assert!(blocks.len() > 50);
        for s in &blocks {
            assert_eq!((s.duration, s.distance, s.degree), (1, 1, 2));
            assert_abs_diff_eq!(s.resistance, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(s.eh1, 1.0, epsilon = 1e-12);
        }
        let set = BlockSampleSet {
            dim: 1,
            mode: ConductanceMode::Unit,
            per_env: vec![blocks.clone(), blocks],
        };
        let c = ConstantEstimates::from_samples(&set).unwrap();
        assert_abs_diff_eq!(c.kappa1.value, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.kappa2.value, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn low_dimension_is_rejected() {
        let e = sample_blocks(4, 2, 100, 1, ConductanceMode::Unit).unwrap_err();
        assert_eq!(
            e.to_string(),
            "invalid input: block constants require d ≥ 5"
        );
    }

    #[test]
    fn d5_samples_respect_orderings() {
        let set = sample_blocks(5, 6, 4000, 3, ConductanceMode::Unit).unwrap();
        assert!(set.iter().all(|b| b.is_consistent(5)));
        let c = ConstantEstimates::from_samples(&set).unwrap();
        assert!(c.ordering_violations(5, 3.0).is_empty(), "{c:?}");
    }
}
