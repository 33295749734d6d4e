//! Multi-environment pipelines. Environments are processed in parallel on
//! the current rayon pool and collected in index order, so results depend
//! only on the master seed and the parameters.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::d4::{cut_time_growth, window_coverage, GrowthRow, WindowQuantity, WindowRow};
use super::fit::{dimension_fit, FitModel, SeriesFit};
use super::stats::{mean_stderr, Estimate};
use crate::environment::Environment;
use crate::error::{Error, Result};
use crate::graph::{bfs, graph_distance, UNREACHED};
use crate::lattice::{
    cut_times, gen_path, loop_erasure_lengths, range_count, retained_count, Sidedness,
    DEFAULT_GUARD_FRACTION,
};
use crate::resistance::{resistance_to_ball_complement, ConductanceMode, ConductanceNetwork};
use crate::rng::{purpose, stream, task_seed};
use crate::walk::{expected_exit_time, return_probabilities, simulate, Ball};

/// Seed of environment `e`.
pub fn env_seed(master: u64, e: u64) -> u64 {
    task_seed(master, e)
}

/// Seed of walker `trial` inside an environment.
pub fn walker_seed(env_seed: u64, trial: u64) -> u64 {
    task_seed(env_seed ^ 0x57A1_4E55, trial)
}

fn par_envs<T, F>(n_envs: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    (0..n_envs as u64).into_par_iter().map(f).collect()
}

/// Fraction of censored walkers above which a run is aborted.
pub const MAX_CENSORED_FRACTION: f64 = 0.01;

fn check_censoring(censored: usize, total: usize) -> Result<()> {
    if total > 0 && censored as f64 > MAX_CENSORED_FRACTION * total as f64 {
        return Err(Error::Horizon {
            needed: censored as u64,
            available: total as u64,
        });
    }
    Ok(())
}

/// Exact return-probability series of one-sided environments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatKernelRun {
    pub dim: usize,
    pub n_max: u32,
    /// `per_env[e][t] = P_0(X_t = 0)` for `t = 0..=n_max`.
    pub per_env: Vec<Vec<f64>>,
    /// Environments whose range graph is not bipartite (always zero on `Z^d`).
    pub non_bipartite: usize,
}

pub fn heat_kernel(
    dim: usize,
    n_envs: usize,
    n_max: u32,
    seed: u64,
    mode: ConductanceMode,
) -> Result<HeatKernelRun> {
    let rows = par_envs(n_envs, |e| {
        let env =
            Environment::with_safe_radius(dim, env_seed(seed, e), Sidedness::OneSided, n_max / 2)?;
        let net = ConductanceNetwork::with_mode(&env.graph, mode);
        let series = return_probabilities(&net, env.root(), n_max, env.safe_radius)?;
        Ok((series, env.graph.is_bipartite()))
    })?;
    let non_bipartite = rows.iter().filter(|r| !r.1).count();
    Ok(HeatKernelRun {
        dim,
        n_max,
        per_env: rows.into_iter().map(|r| r.0).collect(),
        non_bipartite,
    })
}

impl HeatKernelRun {
    /// Mean over environments at every time.
    pub fn mean_series(&self) -> Vec<Estimate> {
        (0..=self.n_max as usize)
            .map(|t| mean_stderr(&self.per_env.iter().map(|s| s[t]).collect::<Vec<_>>()))
            .collect()
    }

    /// Dyadic `n` with `2n <= n_max` and `n >= n_min`.
    pub fn dyadic_levels(&self, n_min: u64) -> Vec<u64> {
        (0..32)
            .map(|k| 1u64 << k)
            .filter(|&n| n >= n_min && 2 * n <= self.n_max as u64)
            .collect()
    }

    /// `max / min` of `n^{1/2} P(X_{2n} = 0)` over `levels`, per environment.
    pub fn flatness(&self, levels: &[u64]) -> Vec<f64> {
        self.per_env
            .iter()
            .map(|s| {
                let v: Vec<f64> = levels
                    .iter()
                    .map(|&n| (n as f64).sqrt() * s[2 * n as usize])
                    .collect();
                super::d4::max_min_ratio(&v)
            })
            .collect()
    }

    /// Fit of the pooled `P(X_{2n} = 0)` against `n` on `levels`.
    pub fn fit(&self, levels: &[u64], model: FitModel) -> Result<SeriesFit> {
        let mean = self.mean_series();
        let n: Vec<f64> = levels.iter().map(|&n| n as f64).collect();
        let v: Vec<f64> = levels.iter().map(|&n| mean[2 * n as usize].value).collect();
        dimension_fit(&n, &v, model)
    }
}

/// One row of the displacement experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisplacementRow {
    pub n: u64,
    pub mean_sq_disp: Estimate,
    pub mean_graph_dist: Estimate,
    pub mean_sq_graph_dist: Estimate,
    /// `max_{m <= n} |X_m|`, averaged.
    pub mean_max_disp: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisplacementRun {
    pub rows: Vec<DisplacementRow>,
    /// Per environment and level, the first walker's `max_{m <= n} |X_m|`.
    pub max_disp_first: Vec<Vec<f64>>,
    pub censored: usize,
    pub walkers: usize,
}

/// Radius that a walk of `n` steps essentially never exceeds in graph distance.
pub fn walk_radius(n: u64) -> u32 {
    (n.min(10 * (n as f64).sqrt() as u64 + 64)) as u32
}

pub fn displacement(
    dim: usize,
    n_envs: usize,
    n_max: u64,
    trials: usize,
    seed: u64,
    mode: ConductanceMode,
    levels: &[u64],
) -> Result<DisplacementRun> {
    if levels.iter().any(|&n| n > n_max || n == 0) {
        return Err(Error::InvalidInput("levels must lie in 1..=n_max".into()));
    }
    struct EnvOut {
        sq: Vec<Vec<f64>>,
        gd: Vec<Vec<f64>>,
        gd2: Vec<Vec<f64>>,
        mx: Vec<Vec<f64>>,
        censored: usize,
    }
    let per = par_envs(n_envs, |e| {
        let es = env_seed(seed, e);
        let env = Environment::with_safe_radius(dim, es, Sidedness::OneSided, walk_radius(n_max))?;
        let net = ConductanceNetwork::with_mode(&env.graph, mode);
        let dist = graph_distance(&env.graph, env.root())?;
        let mut out = EnvOut {
            sq: vec![],
            gd: vec![],
            gd2: vec![],
            mx: vec![],
            censored: 0,
        };
        for trial in 0..trials as u64 {
            let rng = stream(walker_seed(es, trial), purpose::WALKER);
            let t = simulate(&net, env.root(), n_max, rng, &env.guards)?;
            if t.censored {
                out.censored += 1;
                continue;
            }
            let mut sq = Vec::with_capacity(levels.len());
            let mut gd = Vec::with_capacity(levels.len());
            let mut mx = Vec::with_capacity(levels.len());
            let mut running: i64 = 0;
            let mut m = 0usize;
            for &n in levels {
                while m <= n as usize {
                    running = running.max(norm_sq(env.graph.coords(t.vertices[m])));
                    m += 1;
                }
                let v = t.vertices[n as usize];
                sq.push(norm_sq(env.graph.coords(v)) as f64);
                gd.push(dist[v as usize] as f64);
                mx.push((running as f64).sqrt());
            }
            out.sq.push(sq);
            out.gd2.push(gd.iter().map(|x| x * x).collect());
            out.gd.push(gd);
            out.mx.push(mx);
        }
        Ok(out)
    })?;
    let censored: usize = per.iter().map(|p| p.censored).sum();
    check_censoring(censored, n_envs * trials)?;
    let env_mean = |pick: &dyn Fn(&EnvOut) -> &Vec<Vec<f64>>, i: usize| -> Estimate {
        let means: Vec<f64> = per
            .iter()
            .map(pick)
            .filter(|w| !w.is_empty())
            .map(|w| w.iter().map(|r| r[i]).sum::<f64>() / w.len() as f64)
            .collect();
        mean_stderr(&means)
    };
    let rows = levels
        .iter()
        .enumerate()
        .map(|(i, &n)| DisplacementRow {
            n,
            mean_sq_disp: env_mean(&|p| &p.sq, i),
            mean_graph_dist: env_mean(&|p| &p.gd, i),
            mean_sq_graph_dist: env_mean(&|p| &p.gd2, i),
            mean_max_disp: env_mean(&|p| &p.mx, i),
        })
        .collect();
    let max_disp_first = per
        .iter()
        .map(|p| p.mx.first().cloned().unwrap_or_default())
        .collect();
    Ok(DisplacementRun {
        rows,
        max_disp_first,
        censored,
        walkers: n_envs * trials,
    })
}

fn norm_sq(c: &[i32]) -> i64 {
    c.iter().map(|&x| (x as i64) * (x as i64)).sum()
}

/// Per-radius ball statistics of one environment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallStats {
    pub radius: u32,
    /// `mu(B(0, r))` in the chosen conductances.
    pub volume: f64,
    pub resistance: f64,
    pub exit_time: Option<f64>,
}

/// Volumes, complement resistances and (optionally) exact exit times over
/// `radii` for one-sided environments.
pub fn ball_statistics(
    dim: usize,
    n_envs: usize,
    radii: &[u32],
    seed: u64,
    mode: ConductanceMode,
    with_exit_times: bool,
) -> Result<Vec<Vec<BallStats>>> {
    let r_max = radii.iter().copied().max().unwrap_or(0);
    par_envs(n_envs, |e| {
        let env =
            Environment::with_safe_radius(dim, env_seed(seed, e), Sidedness::OneSided, r_max + 1)?;
        let net = ConductanceNetwork::with_mode(&env.graph, mode);
        radii
            .iter()
            .map(|&r| {
                let ball = Ball::new(&net, env.root(), r)?;
                Ok(BallStats {
                    radius: r,
                    volume: ball.volume(&net),
                    resistance: resistance_to_ball_complement(&net, env.root(), r)?,
                    exit_time: if with_exit_times {
                        Some(expected_exit_time(&net, &ball)?)
                    } else {
                        None
                    },
                })
            })
            .collect()
    })
}

/// Invariants of ball statistics: `n <= mu(B(0, n))` (unit mode),
/// `R(0, B^c) <= n + 1` and `E tau <= R mu(B)`.
pub fn ball_violations(stats: &[Vec<BallStats>], mode: ConductanceMode) -> Vec<String> {
    let mut bad = Vec::new();
    for (e, env) in stats.iter().enumerate() {
        for s in env {
            let r = s.radius as f64;
            if mode == ConductanceMode::Unit && s.volume < r {
                bad.push(format!("env {e}: volume {} < radius {r}", s.volume));
            }
            if s.resistance > r + 1.0 + 1e-9 {
                bad.push(format!(
                    "env {e}: R(0, B({r})^c) = {} > {}",
                    s.resistance,
                    r + 1.0
                ));
            }
            if let Some(t) = s.exit_time {
                if t > s.resistance * s.volume * (1.0 + 1e-9) {
                    bad.push(format!(
                        "env {e}: E tau {t} > R mu = {}",
                        s.resistance * s.volume
                    ));
                }
            }
        }
    }
    bad
}

/// Positive exact one-sided cut-times of environment paths of `horizon` steps.
pub fn one_sided_cut_times(
    dim: usize,
    n_envs: usize,
    horizon: u64,
    seed: u64,
) -> Result<Vec<Vec<i64>>> {
    par_envs(n_envs, |e| {
        let path = gen_path(dim, horizon, env_seed(seed, e), Sidedness::OneSided)?;
        let cuts = cut_times(&path.trace(), Sidedness::OneSided, DEFAULT_GUARD_FRACTION)?;
        Ok(cuts.exact().into_iter().filter(|&t| t > 0).collect())
    })
}

pub fn cut_time_growth_run(
    dim: usize,
    n_envs: usize,
    horizon: u64,
    seed: u64,
) -> Result<Vec<GrowthRow>> {
    let cuts = one_sided_cut_times(dim, n_envs, horizon, seed)?;
    let levels: Vec<u64> = (1..40).map(|k| 1u64 << k).collect();
    Ok(cut_time_growth(&cuts, &levels))
}

/// Range density and loop-erasure statistics of one-sided paths at time
/// `n = horizon / 10`; the rest of the window feeds `retained_count`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathStats {
    pub n: u64,
    pub horizon: u64,
    /// `#{S_m : m <= horizon} / horizon`.
    pub range_density: Estimate,
    /// `Y_n / n`.
    pub erased_fraction: Estimate,
    /// `Y_n (ln n)^{1/3} / n`.
    pub erased_fraction_log: Estimate,
    /// `Y'_n / Y_n` per environment.
    pub retained_ratio: Vec<f64>,
}

pub fn path_stats(dim: usize, n_envs: usize, horizon: u64, seed: u64) -> Result<PathStats> {
    if horizon < 20 {
        return Err(Error::InvalidInput(format!("horizon {horizon} below 20")));
    }
    let n = horizon / 10;
    let per = par_envs(n_envs, |e| {
        let path = gen_path(dim, horizon, env_seed(seed, e), Sidedness::OneSided)?;
        let tr = path.trace();
        let range = range_count(&tr, horizon as i64)? as f64 / horizon as f64;
        let y = loop_erasure_lengths(&tr, n as i64)?[n as usize] as f64;
        let kept = retained_count(&tr, n as i64, horizon as i64)? as f64;
        Ok((range, y / n as f64, kept / y))
    })?;
    let log = (n as f64).ln().cbrt();
    let col = |f: &dyn Fn(&(f64, f64, f64)) -> f64| per.iter().map(f).collect::<Vec<_>>();
    Ok(PathStats {
        n,
        horizon,
        range_density: mean_stderr(&col(&|r| r.0)),
        erased_fraction: mean_stderr(&col(&|r| r.1)),
        erased_fraction_log: mean_stderr(&col(&|r| r.1 * log)),
        retained_ratio: col(&|r| r.2),
    })
}

/// Samples for the scaling-limit test, one walker per environment.
///
/// `d_G(0, X_n)` has the parity of `n` and coordinates are integers, so the
/// raw values sit on lattices of spacing 2 and 1. Before scaling each value is
/// spread uniformly over its lattice cell (the distance cell at 0 is folded
/// onto `[0, 1)`), which makes the samples comparable with continuous limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingSamples {
    pub n: u64,
    /// `d_G(0, X_n)`.
    pub distance: Vec<u32>,
    /// First coordinate of `X_n`.
    pub coordinate: Vec<i32>,
    /// `n^{-1/2}` times the spread distance.
    pub scaled_distance: Vec<f64>,
    /// `n^{-1/4}` times the spread coordinate.
    pub scaled_coordinate: Vec<f64>,
    pub censored: usize,
}

pub fn scaling_samples(
    dim: usize,
    n_envs: usize,
    n: u64,
    seed: u64,
    mode: ConductanceMode,
) -> Result<ScalingSamples> {
    let per = par_envs(n_envs, |e| {
        let es = env_seed(seed, e);
        let env = Environment::with_safe_radius(dim, es, Sidedness::OneSided, walk_radius(n))?;
        let net = ConductanceNetwork::with_mode(&env.graph, mode);
        let t = simulate(
            &net,
            env.root(),
            n,
            stream(walker_seed(es, 0), purpose::WALKER),
            &env.guards,
        )?;
        if t.censored {
            return Ok(None);
        }
        let v = *t.vertices.last().unwrap();
        let (dist, _) = bfs(&env.graph, env.root(), n as u32)?;
        debug_assert_ne!(dist[v as usize], UNREACHED);
        Ok(Some((
            dist[v as usize],
            env.graph.coords(v)[0],
            walker_seed(es, 1),
        )))
    })?;
    let censored = per.iter().filter(|p| p.is_none()).count();
    check_censoring(censored, n_envs)?;
    let nf = n as f64;
    let mut out = ScalingSamples {
        n,
        distance: Vec::new(),
        coordinate: Vec::new(),
        scaled_distance: Vec::new(),
        scaled_coordinate: Vec::new(),
        censored,
    };
    for (d, x, s) in per.into_iter().flatten() {
        let mut rng = stream(s, purpose::WALKER);
        let spread_d = (d as f64 + rng.random_range(-1.0..1.0)).abs();
        let spread_x = x as f64 + rng.random_range(-0.5..0.5);
        out.distance.push(d);
        out.coordinate.push(x);
        out.scaled_distance.push(spread_d / nf.sqrt());
        out.scaled_coordinate.push(spread_x / nf.powf(0.25));
    }
    Ok(out)
}

/// Window coverage of the four quantities at each `n`, one-sided environments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowRun {
    pub rows: Vec<WindowRow>,
    /// `values[q][i][e]`: quantity `q` at `ns[i]` in environment `e`.
    pub values: Vec<Vec<Vec<f64>>>,
    pub ns: Vec<u64>,
    pub censored: usize,
}

pub fn window_run(
    dim: usize,
    n_envs: usize,
    ns: &[u64],
    seed: u64,
    mode: ConductanceMode,
    grid: &[f64],
) -> Result<WindowRun> {
    let n_top = ns.iter().copied().max().unwrap_or(1);
    // return probabilities at 2n need radius n; walks and balls need less
    let radius = (n_top as u32 + 1).max(walk_radius(n_top));
    let per = par_envs(n_envs, |e| {
        let es = env_seed(seed, e);
        let env = Environment::with_safe_radius(dim, es, Sidedness::OneSided, radius)?;
        let net = ConductanceNetwork::with_mode(&env.graph, mode);
        let hk = return_probabilities(&net, env.root(), 2 * n_top as u32, env.safe_radius)?;
        let t = simulate(
            &net,
            env.root(),
            n_top,
            stream(walker_seed(es, 0), purpose::WALKER),
            &env.guards,
        )?;
        let mut vals = vec![Vec::with_capacity(ns.len()); 4];
        for &n in ns {
            let ball = Ball::new(&net, env.root(), n as u32)?;
            vals[0].push(ball.volume(&net));
            vals[1].push(expected_exit_time(&net, &ball)?);
            vals[2].push(if t.censored {
                f64::NAN
            } else {
                t.vertices[..=n as usize]
                    .iter()
                    .map(|&v| norm_sq(env.graph.coords(v)))
                    .max()
                    .map_or(0.0, |m| (m as f64).sqrt())
            });
            vals[3].push(hk[2 * n as usize]);
        }
        Ok((vals, t.censored))
    })?;
    let censored = per.iter().filter(|p| p.1).count();
    check_censoring(censored, n_envs)?;
    let mut values = vec![vec![vec![]; ns.len()]; 4];
    for (vals, _) in &per {
        for q in 0..4 {
            for i in 0..ns.len() {
                if !vals[q][i].is_nan() {
                    values[q][i].push(vals[q][i]);
                }
            }
        }
    }
    let mut rows = Vec::new();
    for (q, quantity) in WindowQuantity::ALL.iter().enumerate() {
        for (i, &n) in ns.iter().enumerate() {
            rows.extend(window_coverage(*quantity, n, &values[q][i], grid));
        }
    }
    Ok(WindowRun {
        rows,
        values,
        ns: ns.to_vec(),
        censored,
    })
}
