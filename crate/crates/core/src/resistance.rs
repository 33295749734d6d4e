//! Electrical quantities on range graphs with unit or crossing-count
//! conductances.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{bfs, Block, EdgeMultiplicity, RangeGraph, UNREACHED};
use crate::solve::{self, Method};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConductanceMode {
    /// A unit resistor on every edge; the walk is the simple random walk.
    #[default]
    Unit,
    /// Conductance equal to the number of crossings of the edge by the path.
    CrossingCount,
}

impl std::str::FromStr for ConductanceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unit" | "uniform" => Ok(ConductanceMode::Unit),
            "crossing-count" | "weighted" => Ok(ConductanceMode::CrossingCount),
            other => Err(Error::InvalidInput(format!(
                "unknown conductance mode '{other}'"
            ))),
        }
    }
}

/// A range graph with a conductance on every edge. Vertex weights are the
/// summed conductances (`deg` in unit mode, `mu_x` in crossing-count mode),
/// which is the reversible measure of the associated walk.
#[derive(Debug, Clone)]
pub struct ConductanceNetwork<'g> {
    graph: &'g RangeGraph,
    mode: ConductanceMode,
    conductance: Vec<f64>,
    weight: Vec<f64>,
}

impl<'g> ConductanceNetwork<'g> {
    pub fn unit(graph: &'g RangeGraph) -> Self {
        ConductanceNetwork {
            graph,
            mode: ConductanceMode::Unit,
            conductance: vec![1.0; graph.num_slots()],
            weight: (0..graph.num_vertices() as u32)
                .map(|v| graph.degree(v) as f64)
                .collect(),
        }
    }

    pub fn crossing_count(graph: &'g RangeGraph, mu: &EdgeMultiplicity) -> Result<Self> {
        if mu.per_slot.len() != graph.num_slots() {
            return Err(Error::InvalidInput(
                "multiplicities do not match the graph".into(),
            ));
        }
        if mu.per_slot.iter().any(|&m| m == 0) {
            return Err(Error::InvalidInput(
                "every edge needs a positive crossing count".into(),
            ));
        }
        Ok(ConductanceNetwork {
            graph,
            mode: ConductanceMode::CrossingCount,
            conductance: mu.per_slot.iter().map(|&m| m as f64).collect(),
            weight: mu.per_vertex.iter().map(|&m| m as f64).collect(),
        })
    }

    /// Crossing counts taken straight from the path that generated `graph`.
    pub fn with_mode(graph: &'g RangeGraph, mode: ConductanceMode) -> Self {
        match mode {
            ConductanceMode::Unit => Self::unit(graph),
            ConductanceMode::CrossingCount => {
                let mut per_slot = vec![0u32; graph.num_slots()];
                for w in graph.path_vertices().windows(2) {
                    per_slot[graph.slot(w[0], w[1]).unwrap()] += 1;
                    per_slot[graph.slot(w[1], w[0]).unwrap()] += 1;
                }
                let per_vertex = (0..graph.num_vertices() as u32)
                    .map(|v| graph.slot_range(v).map(|s| per_slot[s] as u64).sum())
                    .collect();
                Self::crossing_count(
                    graph,
                    &EdgeMultiplicity {
                        per_slot,
                        per_vertex,
                    },
                )
                .expect("crossing counts of the generating path are positive")
            }
        }
    }

    /// Override the conductance of the undirected edge `{a, b}`.
    pub fn set_conductance(&mut self, a: u32, b: u32, c: f64) -> Result<()> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "conductance {c} must be positive"
            )));
        }
        let sa = self.graph.slot(a, b).ok_or(Error::InvalidVertex(b))?;
        let sb = self.graph.slot(b, a).ok_or(Error::InvalidVertex(a))?;
        let old = self.conductance[sa];
        self.conductance[sa] = c;
        self.conductance[sb] = c;
        self.weight[a as usize] += c - old;
        self.weight[b as usize] += c - old;
        Ok(())
    }

    pub fn graph(&self) -> &'g RangeGraph {
        self.graph
    }

    pub fn mode(&self) -> ConductanceMode {
        self.mode
    }

    #[inline]
    pub fn weight(&self, v: u32) -> f64 {
        self.weight[v as usize]
    }

    pub fn conductance(&self, a: u32, b: u32) -> Option<f64> {
        self.graph.slot(a, b).map(|s| self.conductance[s])
    }

    /// `(neighbour, conductance)` pairs at `v`.
    #[inline]
    pub fn edges_of(&self, v: u32) -> impl Iterator<Item = (u32, f64)> + '_ {
        let r = self.graph.slot_range(v);
        self.graph
            .neighbors(v)
            .iter()
            .copied()
            .zip(self.conductance[r].iter().copied())
    }

    /// Sum of conductances over undirected edges.
    pub fn total_conductance(&self) -> f64 {
        self.conductance.iter().sum::<f64>() / 2.0
    }
}

/// Effective resistance between `a` and the set `b` on the whole network.
pub fn effective_resistance(net: &ConductanceNetwork, a: u32, b: &[u32]) -> Result<f64> {
    effective_resistance_with(net, a, b, Method::Auto)
}

pub fn effective_resistance_with(
    net: &ConductanceNetwork,
    a: u32,
    b: &[u32],
    method: Method,
) -> Result<f64> {
    let g = net.graph();
    g.check_vertex(a)?;
    if b.is_empty() {
        return Err(Error::InvalidInput("empty terminal set".into()));
    }
    let mut is_terminal = vec![false; g.num_vertices()];
    for &v in b {
        g.check_vertex(v)?;
        if v == a {
            return Err(Error::InvalidInput("source inside the terminal set".into()));
        }
        is_terminal[v as usize] = true;
    }
    is_terminal[a as usize] = true;
    let interior: Vec<u32> = (0..g.num_vertices() as u32)
        .filter(|&v| !is_terminal[v as usize])
        .collect();
    let mut fixed: Vec<(u32, f64)> = b.iter().map(|&v| (v, 0.0)).collect();
    fixed.push((a, 1.0));
    resistance_from_solution(net, a, &interior, &fixed, method)
}

fn resistance_from_solution(
    net: &ConductanceNetwork,
    a: u32,
    interior: &[u32],
    fixed: &[(u32, f64)],
    method: Method,
) -> Result<f64> {
    let sol = solve::solve(net, interior, fixed, |_| 0.0, method)?;
    let current = sol.current_out(net, a);
    if current <= 0.0 {
        return Err(Error::Singular("no current flows from the source".into()));
    }
    Ok(1.0 / current)
}

/// Effective resistance between `a` and `b` inside the sub-network spanned
/// by `region` (which must contain both). Edges leaving the region are cut.
pub fn resistance_in_region(
    net: &ConductanceNetwork,
    a: u32,
    b: u32,
    region: &[u32],
    method: Method,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let interior: Vec<u32> = region
        .iter()
        .copied()
        .filter(|&v| v != a && v != b)
        .collect();
    if interior.len() + 2 != region.len() {
        return Err(Error::InvalidInput(
            "region must contain both terminals once".into(),
        ));
    }
    resistance_from_solution(net, a, &interior, &[(a, 1.0), (b, 0.0)], method)
}

/// Resistance between the two cut-points of a block. Cut-points separate
/// the graph, so the rest of the network carries no current.
pub fn block_resistance(net: &ConductanceNetwork, block: &Block) -> Result<f64> {
    if block.vertices.len() == 2 {
        return Ok(1.0
            / net
                .conductance(block.left, block.right)
                .ok_or_else(|| Error::InvalidInput("two-vertex block without an edge".into()))?);
    }
    resistance_in_region(net, block.left, block.right, &block.vertices, Method::Auto)
}

/// `R(root, B(root, r)^c)` with the complement collapsed to one grounded node.
pub fn resistance_to_ball_complement(net: &ConductanceNetwork, root: u32, r: u32) -> Result<f64> {
    let g = net.graph();
    let (dist, order) = bfs(g, root, r + 1)?;
    let boundary: Vec<(u32, f64)> = order
        .iter()
        .filter(|&&v| dist[v as usize] == r + 1)
        .map(|&v| (v, 0.0))
        .collect();
    if boundary.is_empty() {
        return Err(Error::BallCoversGraph { radius: r });
    }
    let interior: Vec<u32> = order
        .iter()
        .copied()
        .filter(|&v| v != root && dist[v as usize] <= r && dist[v as usize] != UNREACHED)
        .collect();
    let mut fixed = boundary;
    fixed.push((root, 1.0));
    resistance_from_solution(net, root, &interior, &fixed, Method::Auto)
}

/// `R(start, C_k)` for consecutive cut-points, by the series law over the
/// segments `[times[0], times[1]], [times[1], times[2]], ...`.
///
/// `times[0]` must be either a cut-time or the first time of a one-sided
/// path, so that every segment is closed under adjacency apart from its ends.
pub fn cutpoint_resistance_profile(net: &ConductanceNetwork, times: &[i64]) -> Result<Vec<f64>> {
    let g = net.graph();
    let mut out = Vec::with_capacity(times.len().saturating_sub(1));
    let mut acc = 0.0;
    let mut marks = vec![false; g.num_vertices()];
    for w in times.windows(2) {
        let (s, e) = (w[0], w[1]);
        if s >= e || s < g.first_time() || e > g.last_time() {
            return Err(Error::InvalidInput(format!("bad segment [{s}, {e}]")));
        }
        let mut region = Vec::new();
        for t in s..=e {
            let v = g.vertex_at(t);
            if !marks[v as usize] {
                marks[v as usize] = true;
                region.push(v);
            }
        }
        for &v in &region {
            marks[v as usize] = false;
        }
        region.sort_unstable();
        let block = Block {
            start_time: s,
            end_time: e,
            left: g.vertex_at(s),
            right: g.vertex_at(e),
            vertices: region,
        };
        acc += block_resistance(net, &block)?;
        out.push(acc);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;
    use crate::lattice::{LatticePoint, Sidedness, Step, WalkPath};
    use approx::assert_abs_diff_eq;

    fn graph_of(d: usize, list: &[&[i32]]) -> RangeGraph {
        let pts: Vec<LatticePoint> = list.iter().map(|c| LatticePoint(c.to_vec())).collect();
        assert!(pts.iter().all(|p| p.dim() == d));
        build_graph(&WalkPath::from_points(&pts).unwrap()).unwrap()
    }

    fn half_line(n: usize) -> RangeGraph {
        let p =
            WalkPath::from_steps(1, vec![Step::new(0, false); n], 0, Sidedness::OneSided).unwrap();
        build_graph(&p).unwrap()
    }

    #[test]
    fn series_law_on_a_path() {
        let g = graph_of(1, &[&[0], &[1], &[2]]);
        let net = ConductanceNetwork::unit(&g);
        assert_abs_diff_eq!(
            effective_resistance(&net, 0, &[2]).unwrap(),
            2.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn parallel_law_on_a_square() {
        let g = graph_of(2, &[&[0, 0], &[1, 0], &[1, 1], &[0, 1], &[0, 0]]);
        let net = ConductanceNetwork::unit(&g);
        let far = g.path_vertices()[2];
        assert_abs_diff_eq!(
            effective_resistance(&net, 0, &[far]).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        let cg = effective_resistance_with(&net, 0, &[far], Method::ConjugateGradient).unwrap();
        assert_abs_diff_eq!(cg, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn ladder_mixes_series_and_parallel() {
        // 2x3 ladder: rungs at x = 0, 1, 2
        let g = graph_of(
            2,
            &[
                &[0, 0],
                &[1, 0],
                &[2, 0],
                &[2, 1],
                &[1, 1],
                &[0, 1],
                &[0, 0],
                &[1, 0],
                &[1, 1],
            ],
        );
        let net = ConductanceNetwork::unit(&g);
        let a = g.root();
        let b = g.path_vertices()[3]; // (2,1)
        let dense = effective_resistance_with(&net, a, &[b], Method::Dense).unwrap();
        let cg = effective_resistance_with(&net, a, &[b], Method::ConjugateGradient).unwrap();
        // node equations: v(1,0) = 4/7, v(2,0) = 2/7, current 5/7
        assert_abs_diff_eq!(dense, 1.4, epsilon = 1e-12);
        assert_abs_diff_eq!(cg, 1.4, epsilon = 1e-10);
    }

    #[test]
    fn ball_complement_on_half_line() {
        let g = half_line(20);
        let net = ConductanceNetwork::unit(&g);
        for n in 0..10 {
            let r = resistance_to_ball_complement(&net, 0, n).unwrap();
            assert_abs_diff_eq!(r, (n + 1) as f64, epsilon = 1e-10);
        }
        assert_eq!(
            resistance_to_ball_complement(&net, 0, 20).unwrap_err(),
            Error::BallCoversGraph { radius: 20 }
        );
    }

    #[test]
    fn straight_profile_is_linear() {
        let g = half_line(10);
        let net = ConductanceNetwork::unit(&g);
        let prof = cutpoint_resistance_profile(&net, &(0..=10).collect::<Vec<_>>()).unwrap();
        for (k, r) in prof.iter().enumerate() {
            assert_abs_diff_eq!(*r, (k + 1) as f64, epsilon = 1e-12);
        }
    }

    #[test]
    fn crossing_counts_lower_resistance() {
        let pts = [&[0][..], &[1], &[0], &[1], &[2]];
        let p = WalkPath::from_points(
            &pts.iter()
                .map(|c| LatticePoint(c.to_vec()))
                .collect::<Vec<_>>(),
        )
        .unwrap();
        let g = build_graph(&p).unwrap();
        let net = ConductanceNetwork::with_mode(&g, ConductanceMode::CrossingCount);
        // edge {0,1} crossed three times, {1,2} once
        assert_eq!(net.conductance(0, 1), Some(3.0));
        assert_abs_diff_eq!(net.weight(1), 4.0);
        let r = effective_resistance(&net, 0, &[2]).unwrap();
        assert_abs_diff_eq!(r, 1.0 / 3.0 + 1.0, epsilon = 1e-12);
    }

    #[test]
    fn source_in_terminal_set_is_rejected() {
        let g = half_line(3);
        let net = ConductanceNetwork::unit(&g);
        assert!(effective_resistance(&net, 1, &[1, 2]).is_err());
        assert!(effective_resistance(&net, 1, &[]).is_err());
    }

    #[test]
    fn mode_parses() {
        assert_eq!(
            "weighted".parse::<ConductanceMode>().unwrap(),
            ConductanceMode::CrossingCount
        );
        assert_eq!(
            "uniform".parse::<ConductanceMode>().unwrap(),
            ConductanceMode::Unit
        );
        assert!("ohm".parse::<ConductanceMode>().is_err());
    }
}
