//! The range graph of a path: vertices are visited points, edges are
//! traversed steps. Also metric balls, the degree measure, crossing counts,
//! and the decomposition of a two-sided range into cut-time blocks.

use std::collections::VecDeque;
use std::io::Write;

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::lattice::{CutTimeSet, LatticePoint, Sidedness, Trace, WalkPath};

/// Distance value for vertices not reached by a truncated search.
pub const UNREACHED: u32 = u32::MAX;

/// Range graph in compressed adjacency form. Vertex ids are the site ids of
/// the path's [`Trace`], so vertex `k` is the `k`-th distinct point visited.
#[derive(Debug, Clone)]
pub struct RangeGraph {
    dim: usize,
    sided: Sidedness,
    coords: Vec<i32>,
    offsets: Vec<u32>,
    neighbors: Vec<u32>,
    root: u32,
    vertex_at: Vec<u32>,
    origin_index: usize,
}

/// Build the range graph of `path`.
pub fn build_graph(path: &WalkPath) -> Result<RangeGraph> {
    Ok(RangeGraph::from_trace(&path.trace()))
}

impl RangeGraph {
    pub fn from_trace(trace: &Trace) -> Self {
        let n = trace.num_sites();
        let mut adj: Vec<SmallVec<[u32; 4]>> = vec![SmallVec::new(); n];
        let mut insert = |a: u32, b: u32| {
            let list = &mut adj[a as usize];
            if let Err(pos) = list.binary_search(&b) {
                list.insert(pos, b);
            }
        };
        for w in trace.sites().windows(2) {
            insert(w[0], w[1]);
            insert(w[1], w[0]);
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut neighbors = Vec::with_capacity(adj.iter().map(|l| l.len()).sum());
        offsets.push(0u32);
        for list in &adj {
            neighbors.extend_from_slice(list);
            offsets.push(neighbors.len() as u32);
        }
        RangeGraph {
            dim: trace.dim(),
            sided: trace.sided(),
            coords: trace.all_coords().to_vec(),
            offsets,
            neighbors,
            root: trace.site(0),
            vertex_at: trace.sites().to_vec(),
            origin_index: trace.origin_index(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sided(&self) -> Sidedness {
        self.sided
    }

    pub fn num_vertices(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn num_edges(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn root(&self) -> u32 {
        self.root
    }

    #[inline]
    pub fn neighbors(&self, v: u32) -> &[u32] {
        let v = v as usize;
        &self.neighbors[self.offsets[v] as usize..self.offsets[v + 1] as usize]
    }

    /// Position of `v`'s adjacency list inside the flat neighbour array.
    #[inline]
    pub fn slot_range(&self, v: u32) -> std::ops::Range<usize> {
        self.offsets[v as usize] as usize..self.offsets[v as usize + 1] as usize
    }

    /// Flat slot index of the edge `a -> b`, if present.
    pub fn slot(&self, a: u32, b: u32) -> Option<usize> {
        let r = self.slot_range(a);
        self.neighbors[r.clone()]
            .iter()
            .position(|&x| x == b)
            .map(|i| r.start + i)
    }

    pub fn num_slots(&self) -> usize {
        self.neighbors.len()
    }

    #[inline]
    pub fn degree(&self, v: u32) -> u32 {
        self.offsets[v as usize + 1] - self.offsets[v as usize]
    }

    pub fn has_edge(&self, a: u32, b: u32) -> bool {
        self.neighbors(a).binary_search(&b).is_ok()
    }

    pub fn coords(&self, v: u32) -> &[i32] {
        let d = self.dim;
        &self.coords[v as usize * d..(v as usize + 1) * d]
    }

    pub fn point(&self, v: u32) -> LatticePoint {
        LatticePoint(self.coords(v).to_vec())
    }

    pub fn check_vertex(&self, v: u32) -> Result<()> {
        if (v as usize) < self.num_vertices() {
            Ok(())
        } else {
            Err(Error::InvalidVertex(v))
        }
    }

    pub fn first_time(&self) -> i64 {
        -(self.origin_index as i64)
    }

    pub fn last_time(&self) -> i64 {
        self.vertex_at.len() as i64 - 1 - self.origin_index as i64
    }

    /// Vertex occupied by the generating path at time `t`.
    #[inline]
    pub fn vertex_at(&self, t: i64) -> u32 {
        self.vertex_at[(t + self.origin_index as i64) as usize]
    }

    /// Vertices in time order from `first_time()`.
    pub fn path_vertices(&self) -> &[u32] {
        &self.vertex_at
    }

    /// Undirected edges `(a, b)` with `a < b`.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.num_vertices() as u32).flat_map(move |a| {
            self.neighbors(a)
                .iter()
                .copied()
                .filter(move |&b| a < b)
                .map(move |b| (a, b))
        })
    }

    /// Two-colouring check. Subgraphs of `Z^d` always pass; the check is
    /// structural so that parity arguments never rest on an assumption.
    pub fn is_bipartite(&self) -> bool {
        let n = self.num_vertices();
        let mut colour = vec![u8::MAX; n];
        let mut queue = VecDeque::new();
        for s in 0..n {
            if colour[s] != u8::MAX {
                continue;
            }
            colour[s] = 0;
            queue.push_back(s as u32);
            while let Some(v) = queue.pop_front() {
                let c = colour[v as usize];
                for &w in self.neighbors(v) {
                    match colour[w as usize] {
                        u8::MAX => {
                            colour[w as usize] = 1 - c;
                            queue.push_back(w);
                        }
                        x if x == c => return false,
                        _ => {}
                    }
                }
            }
        }
        true
    }

    /// Write one line per vertex: `id x1 ... xd deg n1 n2 ...`.
    pub fn dump<W: Write>(&self, mut w: W) -> Result<()> {
        for v in 0..self.num_vertices() as u32 {
            write!(w, "{v}")?;
            for c in self.coords(v) {
                write!(w, " {c}")?;
            }
            write!(w, " {}", self.degree(v))?;
            for n in self.neighbors(v) {
                write!(w, " {n}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Breadth-first distances from `from`; capped at `max_radius` (vertices
/// further away are [`UNREACHED`]). Returns distances and the visited
/// vertices in BFS order.
pub fn bfs(g: &RangeGraph, from: u32, max_radius: u32) -> Result<(Vec<u32>, Vec<u32>)> {
    g.check_vertex(from)?;
    let mut dist = vec![UNREACHED; g.num_vertices()];
    let mut order = vec![from];
    dist[from as usize] = 0;
    let mut head = 0;
    while head < order.len() {
        let v = order[head];
        head += 1;
        let dv = dist[v as usize];
        if dv == max_radius {
            continue;
        }
        for &w in g.neighbors(v) {
            if dist[w as usize] == UNREACHED {
                dist[w as usize] = dv + 1;
                order.push(w);
            }
        }
    }
    Ok((dist, order))
}

/// Graph distance from `from` to every vertex.
pub fn graph_distance(g: &RangeGraph, from: u32) -> Result<Vec<u32>> {
    Ok(bfs(g, from, UNREACHED - 1)?.0)
}

/// The metric ball `B(center, r)`, as sorted vertex ids.
pub fn ball(g: &RangeGraph, center: u32, r: u32) -> Result<Vec<u32>> {
    let (_, mut order) = bfs(g, center, r)?;
    order.sort_unstable();
    Ok(order)
}

/// Degree measure `mu(set) = sum of degrees`.
pub fn volume(g: &RangeGraph, set: &[u32]) -> u64 {
    set.iter().map(|&v| g.degree(v) as u64).sum()
}

/// Crossing counts of every edge by the generating path.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMultiplicity {
    /// Count per adjacency slot (both directions of an edge carry the same value).
    pub per_slot: Vec<u32>,
    /// `mu_x`, the sum of crossing counts over edges at `x`.
    pub per_vertex: Vec<u64>,
}

impl EdgeMultiplicity {
    pub fn edge(&self, g: &RangeGraph, a: u32, b: u32) -> Option<u32> {
        g.slot(a, b).map(|s| self.per_slot[s])
    }

    pub fn total(&self) -> u64 {
        self.per_vertex.iter().sum()
    }
}

/// Count how often the path crosses each edge of `g`.
pub fn edge_multiplicities(path: &WalkPath, g: &RangeGraph) -> Result<EdgeMultiplicity> {
    if path.steps().len() + 1 != g.path_vertices().len() {
        return Err(Error::InvalidInput(
            "graph was not built from this path".into(),
        ));
    }
    let mut per_slot = vec![0u32; g.num_slots()];
    for w in g.path_vertices().windows(2) {
        let (a, b) = (w[0], w[1]);
        let sa = g
            .slot(a, b)
            .ok_or_else(|| Error::InvalidInput("missing edge".into()))?;
        let sb = g
            .slot(b, a)
            .ok_or_else(|| Error::InvalidInput("missing edge".into()))?;
        per_slot[sa] += 1;
        per_slot[sb] += 1;
    }
    let per_vertex = (0..g.num_vertices() as u32)
        .map(|v| g.slot_range(v).map(|s| per_slot[s] as u64).sum())
        .collect();
    Ok(EdgeMultiplicity {
        per_slot,
        per_vertex,
    })
}

/// Shape of a block translated to its left cut-point; equal shapes hash equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BlockShape {
    /// Sorted relative points, flattened.
    pub points: Vec<i32>,
    /// Edges as sorted index pairs into `points`.
    pub edges: Vec<(u32, u32)>,
    pub displacement: Vec<i32>,
}

/// The piece of the path between two consecutive cut-times.
#[derive(Debug, Clone)]
pub struct Block {
    pub start_time: i64,
    pub end_time: i64,
    /// Vertices `{S_m : start <= m <= end}` as sorted global ids.
    pub vertices: Vec<u32>,
    pub left: u32,
    pub right: u32,
}

impl Block {
    pub fn duration(&self) -> i64 {
        self.end_time - self.start_time
    }

    pub fn displacement(&self, g: &RangeGraph) -> LatticePoint {
        g.point(self.right).sub(&g.point(self.left))
    }

    /// Vertices strictly inside the block (neither cut-point).
    pub fn interior(&self) -> impl Iterator<Item = u32> + '_ {
        self.vertices
            .iter()
            .copied()
            .filter(move |&v| v != self.left && v != self.right)
    }

    pub fn contains(&self, v: u32) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }

    /// Translation-invariant shape of the block.
    pub fn shape(&self, g: &RangeGraph) -> BlockShape {
        let d = g.dim();
        let origin = g.coords(self.left);
        let mut rel: Vec<(Vec<i32>, u32)> = self
            .vertices
            .iter()
            .map(|&v| {
                (
                    g.coords(v).iter().zip(origin).map(|(a, b)| a - b).collect(),
                    v,
                )
            })
            .collect();
        rel.sort();
        let lookup: rustc_hash::FxHashMap<u32, u32> = rel
            .iter()
            .enumerate()
            .map(|(i, (_, v))| (*v, i as u32))
            .collect();
        let local = |v: u32| lookup[&v];
        let mut edges: Vec<(u32, u32)> = (self.start_time..self.end_time)
            .map(|t| {
                let (a, b) = (local(g.vertex_at(t)), local(g.vertex_at(t + 1)));
                (a.min(b), a.max(b))
            })
            .collect();
        edges.sort_unstable();
        edges.dedup();
        let mut points = Vec::with_capacity(rel.len() * d);
        for (p, _) in &rel {
            points.extend_from_slice(p);
        }
        BlockShape {
            points,
            edges,
            displacement: self.displacement(g).0,
        }
    }
}

/// Split the path between consecutive exact cut-times into blocks.
pub fn block_decompose(g: &RangeGraph, cuts: &CutTimeSet) -> Result<Vec<Block>> {
    let exact = cuts.exact();
    if exact.len() < 2 {
        return Err(Error::InsufficientCutTimes {
            found: exact.len(),
            needed: 2,
        });
    }
    let mut marks = vec![false; g.num_vertices()];
    let blocks = exact
        .windows(2)
        .map(|w| {
            let (s, e) = (w[0], w[1]);
            let mut vertices = Vec::new();
            for t in s..=e {
                let v = g.vertex_at(t);
                if !marks[v as usize] {
                    marks[v as usize] = true;
                    vertices.push(v);
                }
            }
            for &v in &vertices {
                marks[v as usize] = false;
            }
            vertices.sort_unstable();
            Block {
                start_time: s,
                end_time: e,
                vertices,
                left: g.vertex_at(s),
                right: g.vertex_at(e),
            }
        })
        .collect();
    Ok(blocks)
}

/// Glue blocks back together at their cut-points, returning absolute points
/// and edges (as point pairs, each pair sorted).
pub fn reassemble(
    g: &RangeGraph,
    blocks: &[Block],
) -> (Vec<LatticePoint>, Vec<(LatticePoint, LatticePoint)>) {
    let mut points = Vec::new();
    let mut edges = Vec::new();
    let Some(first) = blocks.first() else {
        return (points, edges);
    };
    let mut anchor = g.point(first.left);
    for b in blocks {
        let shape = b.shape(g);
        let d = g.dim();
        let abs: Vec<LatticePoint> = shape
            .points
            .chunks(d)
            .map(|p| LatticePoint(p.iter().zip(&anchor.0).map(|(a, b)| a + b).collect()))
            .collect();
        for &(i, j) in &shape.edges {
            let (p, q) = (abs[i as usize].clone(), abs[j as usize].clone());
            edges.push(if p <= q { (p, q) } else { (q, p) });
        }
        points.extend(abs);
        anchor = LatticePoint(
            anchor
                .0
                .iter()
                .zip(&shape.displacement)
                .map(|(a, b)| a + b)
                .collect(),
        );
    }
    points.sort();
    points.dedup();
    edges.sort();
    edges.dedup();
    (points, edges)
}
