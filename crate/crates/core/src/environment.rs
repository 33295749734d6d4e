//! A generated path bundled with its range graph and cut-time structure.

use crate::error::{Error, Result};
use crate::graph::{bfs, RangeGraph, UNREACHED};
use crate::lattice::{
    cut_times, gen_path, CutTimeSet, Sidedness, WalkPath, DEFAULT_GUARD_FRACTION,
};

/// Exact cut-points indexed by integers, with index 0 at the first exact
/// cut-time `>= 0`.
#[derive(Debug, Clone)]
pub struct CutPoints {
    pub times: Vec<i64>,
    pub vertices: Vec<u32>,
    /// Position of index 0 inside `times`.
    pub zero: usize,
    index_of: Vec<i64>,
}

const NOT_CUT: i64 = i64::MIN;

/// Longest path [`Environment::with_safe_radius`] will try.
pub const MAX_AUTO_HORIZON: u64 = 1 << 25;

impl CutPoints {
    pub fn new(g: &RangeGraph, exact_times: &[i64]) -> Self {
        let zero = exact_times.partition_point(|&t| t < 0);
        let vertices: Vec<u32> = exact_times.iter().map(|&t| g.vertex_at(t)).collect();
        let mut index_of = vec![NOT_CUT; g.num_vertices()];
        for (i, &v) in vertices.iter().enumerate() {
            index_of[v as usize] = i as i64 - zero as i64;
        }
        CutPoints {
            times: exact_times.to_vec(),
            vertices,
            zero,
            index_of,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Smallest and largest index.
    pub fn index_range(&self) -> (i64, i64) {
        (
            -(self.zero as i64),
            self.times.len() as i64 - 1 - self.zero as i64,
        )
    }

    fn pos(&self, k: i64) -> Result<usize> {
        let p = k + self.zero as i64;
        if p < 0 || p >= self.times.len() as i64 {
            return Err(Error::InsufficientCutTimes {
                found: self.times.len(),
                needed: (k.unsigned_abs() as usize) + 1,
            });
        }
        Ok(p as usize)
    }

    pub fn vertex(&self, k: i64) -> Result<u32> {
        Ok(self.vertices[self.pos(k)?])
    }

    pub fn time(&self, k: i64) -> Result<i64> {
        Ok(self.times[self.pos(k)?])
    }

    /// Cut index of `v`, if `v` is an exact cut-point.
    #[inline]
    pub fn index(&self, v: u32) -> Option<i64> {
        match self.index_of[v as usize] {
            NOT_CUT => None,
            k => Some(k),
        }
    }

    /// Vertices visited between cut-times `k` and `k + 1`, both cut-points
    /// included, sorted.
    pub fn block(&self, g: &RangeGraph, k: i64) -> Result<Vec<u32>> {
        let (s, e) = (self.time(k)?, self.time(k + 1)?);
        let mut out: Vec<u32> = (s..=e).map(|t| g.vertex_at(t)).collect();
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }
}

/// A simulated environment. For one-sided environments the cut structure
/// uses one-sided cut-times, otherwise two-sided ones.
#[derive(Debug, Clone)]
pub struct Environment {
    pub path: WalkPath,
    pub graph: RangeGraph,
    pub cuts: CutTimeSet,
    pub cut_points: CutPoints,
    /// Outermost exact cut-points. Beyond them the finite graph may differ
    /// from the infinite one, so walkers are stopped on reaching them.
    pub guards: Vec<u32>,
    /// Largest `r` such that `B(root, r)` avoids every guard.
    pub safe_radius: u32,
}

impl Environment {
    pub fn generate(dim: usize, horizon: u64, seed: u64, sided: Sidedness) -> Result<Self> {
        Self::from_path(gen_path(dim, horizon, seed, sided)?, DEFAULT_GUARD_FRACTION)
    }

    /// Generate with horizons `4 r, 8 r, ...` (same seed, so each path
    /// extends the previous one) until the safe radius reaches `radius`.
    pub fn with_safe_radius(dim: usize, seed: u64, sided: Sidedness, radius: u32) -> Result<Self> {
        let mut horizon = (4 * radius as u64).max(256);
        loop {
            match Self::generate(dim, horizon, seed, sided) {
                Ok(env) if env.safe_radius >= radius => return Ok(env),
                Ok(_) | Err(Error::InsufficientCutTimes { .. }) => {}
                Err(e) => return Err(e),
            }
            horizon *= 2;
            if horizon > MAX_AUTO_HORIZON {
                return Err(Error::Capacity(format!(
                    "no safe radius {radius} within {MAX_AUTO_HORIZON} steps in d = {dim}"
                )));
            }
        }
    }

    pub fn from_path(path: WalkPath, guard_fraction: f64) -> Result<Self> {
        let trace = path.trace();
        let sided = path.sided();
        let cuts = cut_times(&trace, sided, guard_fraction)?;
        let graph = RangeGraph::from_trace(&trace);
        drop(trace);
        let exact = cuts.exact();
        let cut_points = CutPoints::new(&graph, &exact);
        let mut guards = Vec::new();
        if let Some(&t) = exact.last() {
            if t >= 0 {
                guards.push(graph.vertex_at(t));
            }
        }
        if sided == Sidedness::TwoSided {
            if let Some(&t) = exact.first() {
                if t <= 0 {
                    guards.push(graph.vertex_at(t));
                }
            }
        }
        let needed = if sided == Sidedness::TwoSided { 2 } else { 1 };
        if guards.len() < needed {
            return Err(Error::InsufficientCutTimes {
                found: exact.len(),
                needed,
            });
        }
        let (dist, _) = bfs(&graph, graph.root(), UNREACHED - 1)?;
        let safe_radius = guards
            .iter()
            .map(|&v| dist[v as usize])
            .min()
            .unwrap_or(0)
            .saturating_sub(1);
        Ok(Environment {
            path,
            graph,
            cuts,
            cut_points,
            guards,
            safe_radius,
        })
    }

    pub fn root(&self) -> u32 {
        self.graph.root()
    }

    pub fn is_guard(&self, v: u32) -> bool {
        self.guards.contains(&v)
    }

    /// Whether time 0 is an exact cut-time.
    pub fn rooted_at_cut(&self) -> bool {
        self.cut_points.index(self.root()) == Some(0) && self.cut_points.time(0).ok() == Some(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Step;

    #[test]
    fn straight_two_sided_environment() {
        let fwd = vec![Step::new(0, false); 20];
        let path = WalkPath::two_sided(
            1,
            &fwd,
            &fwd.iter().map(|s| s.reversed()).collect::<Vec<_>>(),
        )
        .unwrap();
        let env = Environment::from_path(path, 0.1).unwrap();
        assert!(env.rooted_at_cut());
        assert_eq!(env.cut_points.vertex(0).unwrap(), env.root());
        let (lo, hi) = env.cut_points.index_range();
        assert!(lo < -5 && hi > 5);
        assert_eq!(env.cut_points.block(&env.graph, 0).unwrap().len(), 2);
        assert_eq!(env.guards.len(), 2);
        assert!(env.safe_radius >= 16);
    }

    #[test]
    fn auto_horizon_reaches_radius() {
        let env = Environment::with_safe_radius(4, 2, Sidedness::OneSided, 300).unwrap();
        assert!(env.safe_radius >= 300);
        assert!(
            Environment::with_safe_radius(5, 2, Sidedness::OneSided, 300)
                .unwrap()
                .path
                .steps()
                .len()
                >= 1200
        );
    }

    #[test]
    fn index_lookup_round_trips() {
        let env = Environment::generate(5, 3000, 11, Sidedness::TwoSided).unwrap();
        let (lo, hi) = env.cut_points.index_range();
        for k in lo..=hi {
            let v = env.cut_points.vertex(k).unwrap();
            assert_eq!(env.cut_points.index(v), Some(k));
        }
        assert!(env.cut_points.vertex(hi + 1).is_err());
    }
}
