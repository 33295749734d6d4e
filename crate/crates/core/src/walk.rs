//! The random walk on a conductance network: trajectories, exact return
//! probabilities, the chain of cut-point visits, hitting and exit times.

use std::io::Write;

use rand::Rng;

use crate::environment::CutPoints;
use crate::error::{Error, Result};
use crate::graph::{bfs, UNREACHED};
use crate::resistance::{resistance_in_region, ConductanceMode, ConductanceNetwork};
use crate::solve::{self, Method, Solution};

/// Draw the next vertex from `v` according to the network's kernel
/// `P(x, y) = c_xy / weight(x)`.
#[inline]
pub fn next_vertex<R: Rng + ?Sized>(net: &ConductanceNetwork, v: u32, rng: &mut R) -> u32 {
    let nbrs = net.graph().neighbors(v);
    match net.mode() {
        ConductanceMode::Unit => nbrs[rng.random_range(0..nbrs.len())],
        ConductanceMode::CrossingCount => {
            let mut u = rng.random::<f64>() * net.weight(v);
            let mut last = nbrs[0];
            for (y, c) in net.edges_of(v) {
                last = y;
                if u < c {
                    return y;
                }
                u -= c;
            }
            last
        }
    }
}

/// Walker position with its step count.
#[derive(Debug, Clone)]
pub struct WalkerState<R> {
    pub vertex: u32,
    pub steps: u64,
    pub rng: R,
}

impl<R: Rng> WalkerState<R> {
    pub fn new(start: u32, rng: R) -> Self {
        WalkerState {
            vertex: start,
            steps: 0,
            rng,
        }
    }

    pub fn step(&mut self, net: &ConductanceNetwork) -> u32 {
        self.vertex = next_vertex(net, self.vertex, &mut self.rng);
        self.steps += 1;
        self.vertex
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    /// Visited vertices, starting with the start vertex.
    pub vertices: Vec<u32>,
    /// The walk reached a guard vertex and was stopped there.
    pub censored: bool,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.len() == 1
    }

    /// One vertex id per line.
    pub fn dump<W: Write>(&self, mut w: W) -> Result<()> {
        for v in &self.vertices {
            writeln!(w, "{v}")?;
        }
        Ok(())
    }
}

/// Run `n_steps` steps from `start`, stopping early if a vertex in `guards`
/// is reached.
pub fn simulate<R: Rng>(
    net: &ConductanceNetwork,
    start: u32,
    n_steps: u64,
    rng: R,
    guards: &[u32],
) -> Result<Trajectory> {
    net.graph().check_vertex(start)?;
    let mut w = WalkerState::new(start, rng);
    let mut vertices = Vec::with_capacity(n_steps as usize + 1);
    vertices.push(start);
    if guards.contains(&start) {
        return Ok(Trajectory {
            vertices,
            censored: true,
        });
    }
    while w.steps < n_steps {
        let v = w.step(net);
        vertices.push(v);
        if guards.contains(&v) {
            return Ok(Trajectory {
                vertices,
                censored: true,
            });
        }
    }
    Ok(Trajectory {
        vertices,
        censored: false,
    })
}

/// A probability distribution over the vertices of a network.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionVector {
    pub mass: Vec<f64>,
}

impl DistributionVector {
    pub fn point(n: usize, v: u32) -> Self {
        let mut mass = vec![0.0; n];
        mass[v as usize] = 1.0;
        DistributionVector { mass }
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// One step of the walk on the whole network.
    pub fn step(&self, net: &ConductanceNetwork) -> Self {
        let mut next = vec![0.0; self.mass.len()];
        for (x, &m) in self.mass.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            let x = x as u32;
            let w = net.weight(x);
            for (y, c) in net.edges_of(x) {
                next[y as usize] += m * c / w;
            }
        }
        DistributionVector { mass: next }
    }
}

/// `P_start(X_n = start)` for `n = 0..=n_max`, computed exactly.
///
/// A walk that returns by time `n_max` never leaves `B(start, n_max / 2)`, so
/// mass is evolved on that ball only; at step `k` only vertices within
/// `min(k, n_max - k)` of the start carry mass that can still return.
/// `safe_radius` bounds the part of the network known to be exact.
pub fn return_probabilities(
    net: &ConductanceNetwork,
    start: u32,
    n_max: u32,
    safe_radius: u32,
) -> Result<Vec<f64>> {
    let g = net.graph();
    let radius = n_max / 2;
    if radius > safe_radius {
        return Err(Error::Horizon {
            needed: radius as u64,
            available: safe_radius as u64,
        });
    }
    let (dist, order) = bfs(g, start, radius)?;
    // local ids follow BFS order, so each distance layer is a prefix
    let n = order.len();
    let mut local = vec![u32::MAX; g.num_vertices()];
    for (i, &v) in order.iter().enumerate() {
        local[v as usize] = i as u32;
    }
    let mut layer_end = vec![0usize; radius as usize + 1];
    for &v in &order {
        layer_end[dist[v as usize] as usize] += 1;
    }
    for r in 1..layer_end.len() {
        layer_end[r] += layer_end[r - 1];
    }
    let mut row_start = Vec::with_capacity(n + 1);
    let mut cols = Vec::new();
    let mut probs = Vec::new();
    row_start.push(0);
    for &x in &order {
        let w = net.weight(x);
        for (y, c) in net.edges_of(x) {
            if local[y as usize] != u32::MAX {
                cols.push(local[y as usize]);
                probs.push(c / w);
            }
        }
        row_start.push(cols.len());
    }

    let mut cur = vec![0.0; n];
    let mut next = vec![0.0; n];
    cur[0] = 1.0;
    let mut out = Vec::with_capacity(n_max as usize + 1);
    out.push(1.0);
    for k in 0..n_max {
        let src = k.min(n_max - k).min(radius) as usize;
        let dst = (k + 1).min(n_max - k - 1).min(radius) as usize;
        let dst_len = layer_end[dst];
        next[..dst_len].iter_mut().for_each(|x| *x = 0.0);
        for x in 0..layer_end[src] {
            let m = cur[x];
            if m == 0.0 {
                continue;
            }
            for j in row_start[x]..row_start[x + 1] {
                let y = cols[j] as usize;
                if y < dst_len {
                    next[y] += m * probs[j];
                }
            }
        }
        std::mem::swap(&mut cur, &mut next);
        out.push(cur[0]);
    }
    Ok(out)
}

/// Hitting structure of a trajectory started at a cut-point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutChainRecord {
    /// Times of visits to the cut-point set, `H_0 = 0`.
    pub h: Vec<u64>,
    /// Cut index at each of those visits.
    pub j: Vec<i64>,
    /// For every time `m`, the index at the last visit not after `m`.
    pub z: Vec<i64>,
}

pub fn cut_chain(cuts: &CutPoints, trajectory: &Trajectory) -> Result<CutChainRecord> {
    let start = trajectory.vertices[0];
    let j0 = cuts
        .index(start)
        .ok_or_else(|| Error::InvalidInput("trajectory must start at a cut-point".into()))?;
    let mut h = vec![0];
    let mut j = vec![j0];
    let mut z = Vec::with_capacity(trajectory.vertices.len());
    z.push(j0);
    for (m, &v) in trajectory.vertices.iter().enumerate().skip(1) {
        if let Some(k) = cuts.index(v) {
            h.push(m as u64);
            j.push(k);
        }
        z.push(*j.last().unwrap());
    }
    Ok(CutChainRecord { h, j, z })
}

/// Resistance between cut-points `k` and `k + 1`, through their block.
pub fn cut_resistance(net: &ConductanceNetwork, cuts: &CutPoints, k: i64) -> Result<f64> {
    let g = net.graph();
    let region = cuts.block(g, k)?;
    resistance_in_region(
        net,
        cuts.vertex(k)?,
        cuts.vertex(k + 1)?,
        &region,
        Method::Auto,
    )
}

/// Law of the next cut index after leaving cut-point `k`:
/// `(p_stay, p_up, p_down)`.
pub fn jump_chain_law(
    net: &ConductanceNetwork,
    cuts: &CutPoints,
    k: i64,
) -> Result<(f64, f64, f64)> {
    let r_down = cut_resistance(net, cuts, k - 1)?;
    let r_up = cut_resistance(net, cuts, k)?;
    // C_k separates the two blocks, so R(C_{k-1}, C_{k+1}) is a series sum
    let r_across = r_down + r_up;
    let w = net.weight(cuts.vertex(k)?);
    let stay = 1.0 - r_across / (w * r_down * r_up);
    Ok((stay, 1.0 / (w * r_up), 1.0 / (w * r_down)))
}

/// Expected hitting times of `targets` from every vertex of `region`
/// (which must contain the targets and be closed apart from them).
pub fn hitting_times(
    net: &ConductanceNetwork,
    region: &[u32],
    targets: &[u32],
) -> Result<Solution> {
    let interior: Vec<u32> = region
        .iter()
        .copied()
        .filter(|v| !targets.contains(v))
        .collect();
    let fixed: Vec<(u32, f64)> = targets.iter().map(|&v| (v, 0.0)).collect();
    solve::solve(net, &interior, &fixed, |x| net.weight(x), Method::Auto)
}

/// `E H_1` from cut-point `k`: expected time of the first visit after time 0
/// to `{C_{k-1}, C_k, C_{k+1}}`.
pub fn expected_h1(net: &ConductanceNetwork, cuts: &CutPoints, k: i64) -> Result<f64> {
    let g = net.graph();
    let mut region = cuts.block(g, k - 1)?;
    region.extend(cuts.block(g, k)?);
    region.sort_unstable();
    region.dedup();
    let c = cuts.vertex(k)?;
    let targets = [cuts.vertex(k - 1)?, c, cuts.vertex(k + 1)?];
    let h = hitting_times(net, &region, &targets)?;
    let w = net.weight(c);
    Ok(1.0
        + net
            .edges_of(c)
            .map(|(y, cy)| cy / w * h.value(y).unwrap_or(0.0))
            .sum::<f64>())
}

/// The metric ball `B(root, r)` together with its outer boundary layer.
#[derive(Debug, Clone)]
pub struct Ball {
    pub root: u32,
    pub radius: u32,
    /// Members in BFS order.
    pub members: Vec<u32>,
    /// Vertices at distance exactly `radius + 1`.
    pub boundary: Vec<u32>,
    dist: Vec<u32>,
}

impl Ball {
    pub fn new(net: &ConductanceNetwork, root: u32, radius: u32) -> Result<Self> {
        let (dist, order) = bfs(net.graph(), root, radius + 1)?;
        let (members, boundary): (Vec<u32>, Vec<u32>) =
            order.into_iter().partition(|&v| dist[v as usize] <= radius);
        if boundary.is_empty() {
            return Err(Error::BallCoversGraph { radius });
        }
        Ok(Ball {
            root,
            radius,
            members,
            boundary,
            dist,
        })
    }

    #[inline]
    pub fn contains(&self, v: u32) -> bool {
        let d = self.dist[v as usize];
        d != UNREACHED && d <= self.radius
    }

    pub fn volume(&self, net: &ConductanceNetwork) -> f64 {
        self.members.iter().map(|&v| net.weight(v)).sum()
    }
}

/// One sample of the exit time of `ball`, or `None` if `cap` steps pass
/// first.
pub fn exit_time<R: Rng>(
    net: &ConductanceNetwork,
    ball: &Ball,
    rng: &mut R,
    cap: u64,
) -> Option<u64> {
    let mut v = ball.root;
    for m in 1..=cap {
        v = next_vertex(net, v, rng);
        if !ball.contains(v) {
            return Some(m);
        }
    }
    None
}

/// Exact `E_root[exit time of ball]`.
pub fn expected_exit_time(net: &ConductanceNetwork, ball: &Ball) -> Result<f64> {
    let fixed: Vec<(u32, f64)> = ball.boundary.iter().map(|&v| (v, 0.0)).collect();
    let sol = solve::solve(net, &ball.members, &fixed, |x| net.weight(x), Method::Auto)?;
    Ok(sol.value(ball.root).unwrap())
}

/// Occupation density of the walk killed on leaving `ball`, normalised so
/// that the expected exit time equals `sum_x g(x) weight(x)`. Returned in
/// the order of `ball.members`.
pub fn occupation_density(net: &ConductanceNetwork, ball: &Ball) -> Result<Vec<f64>> {
    let fixed: Vec<(u32, f64)> = ball.boundary.iter().map(|&v| (v, 0.0)).collect();
    let root = ball.root;
    let sol = solve::solve(
        net,
        &ball.members,
        &fixed,
        |x| if x == root { 1.0 } else { 0.0 },
        Method::Auto,
    )?;
    Ok(ball
        .members
        .iter()
        .map(|&v| sol.value(v).unwrap())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::Environment;
    use crate::graph::build_graph;
    use crate::lattice::{LatticePoint, Sidedness, Step, WalkPath};
    use crate::rng::{purpose, stream};
    use approx::assert_abs_diff_eq;

    fn half_line(n: usize) -> crate::graph::RangeGraph {
        let p =
            WalkPath::from_steps(1, vec![Step::new(0, false); n], 0, Sidedness::OneSided).unwrap();
        build_graph(&p).unwrap()
    }

    fn straight_two_sided(n: usize) -> Environment {
        let f = vec![Step::new(0, false); n];
        let b = vec![Step::new(0, true); n];
        Environment::from_path(WalkPath::two_sided(1, &f, &b).unwrap(), 0.1).unwrap()
    }

    #[test]
    fn first_step_from_half_line_end_is_forced() {
        let g = half_line(10);
        let net = ConductanceNetwork::unit(&g);
        for s in 0..20 {
            let t = simulate(&net, 0, 1, stream(s, purpose::WALKER), &[]).unwrap();
            assert_eq!(t.vertices, vec![0, 1]);
        }
    }

    #[test]
    fn guard_censors() {
        let g = half_line(10);
        let net = ConductanceNetwork::unit(&g);
        let t = simulate(&net, 0, 1000, stream(3, purpose::WALKER), &[4]).unwrap();
        assert!(t.censored);
        assert_eq!(*t.vertices.last().unwrap(), 4);
    }

    #[test]
    fn half_line_return_probabilities() {
        let g = half_line(50);
        let net = ConductanceNetwork::unit(&g);
        let p = return_probabilities(&net, 0, 8, 40).unwrap();
        assert_eq!(p[0], 1.0);
        assert_eq!(p[1], 0.0);
        assert_abs_diff_eq!(p[2], 0.5, epsilon = 1e-15);
        assert_eq!(p[3], 0.0);
        // 0 -> 1 -> {0, 2} -> ...: P(X_4 = 0) = 1/2 * 1/2 + 1/2 * 1/2 * 1/2
        assert_abs_diff_eq!(p[4], 0.375, epsilon = 1e-15);
        assert!(return_probabilities(&net, 0, 100, 40).is_err());
    }

    #[test]
    fn truncated_evolution_matches_full_evolution() {
        let env = Environment::generate(3, 4000, 5, Sidedness::OneSided).unwrap();
        let net = ConductanceNetwork::unit(&env.graph);
        let n_max = 24.min(2 * env.safe_radius);
        let fast = return_probabilities(&net, env.root(), n_max, env.safe_radius).unwrap();
        let mut dv = DistributionVector::point(env.graph.num_vertices(), env.root());
        for k in 1..=n_max as usize {
            dv = dv.step(&net);
            assert_abs_diff_eq!(dv.mass[env.root() as usize], fast[k], epsilon = 1e-14);
        }
        assert_abs_diff_eq!(dv.total(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn straight_chain_records() {
        let env = straight_two_sided(30);
        let net = ConductanceNetwork::unit(&env.graph);
        let t = simulate(
            &net,
            env.root(),
            10,
            stream(1, purpose::WALKER),
            &env.guards,
        )
        .unwrap();
        let rec = cut_chain(&env.cut_points, &t).unwrap();
        assert_eq!(rec.h, (0..=10).collect::<Vec<u64>>());
        for w in rec.j.windows(2) {
            assert_eq!((w[1] - w[0]).abs(), 1);
        }
        assert_eq!(rec.z, rec.j);
        let (stay, up, down) = jump_chain_law(&net, &env.cut_points, 0).unwrap();
        assert_abs_diff_eq!(stay, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(up, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(down, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(
            expected_h1(&net, &env.cut_points, 0).unwrap(),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn half_line_exit_time() {
        let g = half_line(10);
        let net = ConductanceNetwork::unit(&g);
        let ball = Ball::new(&net, 0, 1).unwrap();
        // E_0 = 1 + E_1, E_1 = 1 + E_0 / 2
        let e = expected_exit_time(&net, &ball).unwrap();
        assert_abs_diff_eq!(e, 4.0, epsilon = 1e-12);
        let gb = occupation_density(&net, &ball).unwrap();
        let total: f64 = ball
            .members
            .iter()
            .zip(&gb)
            .map(|(&v, &x)| x * net.weight(v))
            .sum();
        assert_abs_diff_eq!(total, e, epsilon = 1e-12);
        assert!(gb[0] >= gb[1]);
    }

    #[test]
    fn single_edge_weighted_kernel_is_uniform() {
        let pts: Vec<LatticePoint> = [[0], [1], [0]]
            .iter()
            .map(|c| LatticePoint(c.to_vec()))
            .collect();
        let g = build_graph(&WalkPath::from_points(&pts).unwrap()).unwrap();
        let u = ConductanceNetwork::unit(&g);
        let w = ConductanceNetwork::with_mode(&g, ConductanceMode::CrossingCount);
        let a = DistributionVector::point(2, 0).step(&u);
        let b = DistributionVector::point(2, 0).step(&w);
        assert_eq!(a, b);
    }
}
