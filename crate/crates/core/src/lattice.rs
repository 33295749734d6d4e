//! Simple random walk paths on `Z^d` and their path-level combinatorics:
//! site indexing, cut-times, chronological loop erasure and range counts.

use std::io::{Read, Write};

use rand::Rng;
use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::rng::{self, purpose};

/// Largest number of steps a single path may hold. Vertex ids are `u32`.
pub const STEP_BUDGET: u64 = (u32::MAX as u64) - 1;

/// Default fraction of the horizon treated as guard gap for cut-time exactness.
pub const DEFAULT_GUARD_FRACTION: f64 = 0.1;

/// A point of `Z^d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePoint(pub Vec<i32>);

impl LatticePoint {
    pub fn origin(dim: usize) -> Self {
        LatticePoint(vec![0; dim])
    }

    /// `sign * e_axis`.
    pub fn unit(dim: usize, axis: usize, sign: i32) -> Self {
        let mut c = vec![0; dim];
        c[axis] = sign;
        LatticePoint(c)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i32] {
        &self.0
    }

    /// True when the points differ by one unit in exactly one coordinate.
    pub fn is_adjacent(&self, other: &LatticePoint) -> bool {
        self.dim() == other.dim()
            && self
                .0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| (a - b).unsigned_abs() as u64)
                .sum::<u64>()
                == 1
    }

    pub fn norm_sq(&self) -> i64 {
        self.0.iter().map(|&c| c as i64 * c as i64).sum()
    }

    pub fn sub(&self, other: &LatticePoint) -> LatticePoint {
        LatticePoint(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }
}

/// A unit step encoded as `axis * 2 + (1 if negative)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Step(pub u8);

impl Step {
    pub fn new(axis: usize, negative: bool) -> Self {
        Step((axis as u8) << 1 | negative as u8)
    }

    #[inline]
    pub fn axis(self) -> usize {
        (self.0 >> 1) as usize
    }

    #[inline]
    pub fn sign(self) -> i32 {
        if self.0 & 1 == 1 {
            -1
        } else {
            1
        }
    }

    #[inline]
    pub fn reversed(self) -> Step {
        Step(self.0 ^ 1)
    }

    /// Step from `a` to the adjacent point `b`.
    pub fn between(a: &[i32], b: &[i32]) -> Option<Step> {
        let mut found = None;
        for (axis, (x, y)) in a.iter().zip(b).enumerate() {
            match y - x {
                0 => {}
                1 | -1 if found.is_none() => found = Some(Step::new(axis, y - x < 0)),
                _ => return None,
            }
        }
        found
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sidedness {
    OneSided,
    TwoSided,
}

/// A nearest-neighbour trajectory indexed by integer time.
///
/// `steps[k]` moves the walk from time `k - origin_index` to
/// `k - origin_index + 1`, so the position at time 0 is the origin. One-sided
/// paths have `origin_index == 0`; two-sided paths store the time-reversed
/// second walk before the origin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkPath {
    dim: usize,
    steps: Vec<Step>,
    origin_index: usize,
    sided: Sidedness,
    seed: Option<u64>,
}

impl WalkPath {
    pub fn from_steps(
        dim: usize,
        steps: Vec<Step>,
        origin_index: usize,
        sided: Sidedness,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be at least 1".into()));
        }
        if origin_index > steps.len() {
            return Err(Error::InvalidInput("origin index beyond the path".into()));
        }
        if sided == Sidedness::OneSided && origin_index != 0 {
            return Err(Error::InvalidInput(
                "one-sided paths start at the origin".into(),
            ));
        }
        if let Some(s) = steps.iter().find(|s| s.axis() >= dim) {
            return Err(Error::InvalidInput(format!(
                "step {s:?} out of dimension {dim}"
            )));
        }
        if steps.len() as u64 > STEP_BUDGET {
            return Err(Error::Capacity(format!("{} steps", steps.len())));
        }
        Ok(WalkPath {
            dim,
            steps,
            origin_index,
            sided,
            seed: None,
        })
    }

    /// One-sided path through the given points; the first point must be the origin.
    pub fn from_points(points: &[LatticePoint]) -> Result<Self> {
        let first = points
            .first()
            .ok_or_else(|| Error::InvalidInput("empty point sequence".into()))?;
        let dim = first.dim();
        if first.0.iter().any(|&c| c != 0) {
            return Err(Error::InvalidInput("path must start at the origin".into()));
        }
        let steps = points
            .windows(2)
            .map(|w| {
                Step::between(&w[0].0, &w[1].0).ok_or_else(|| {
                    Error::InvalidInput(format!("{:?} -> {:?} is not a unit step", w[0], w[1]))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        WalkPath::from_steps(dim, steps, 0, Sidedness::OneSided)
    }

    /// Two-sided path from a forward walk and an independent second walk,
    /// both given as step sequences starting at the origin.
    pub fn two_sided(dim: usize, forward: &[Step], backward: &[Step]) -> Result<Self> {
        let mut steps = Vec::with_capacity(forward.len() + backward.len());
        // time -k-1 -> -k is the reversal of the second walk's step k -> k+1
        steps.extend(backward.iter().rev().map(|s| s.reversed()));
        steps.extend_from_slice(forward);
        WalkPath::from_steps(dim, steps, backward.len(), Sidedness::TwoSided)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn origin_index(&self) -> usize {
        self.origin_index
    }

    pub fn sided(&self) -> Sidedness {
        self.sided
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn first_time(&self) -> i64 {
        -(self.origin_index as i64)
    }

    pub fn last_time(&self) -> i64 {
        (self.steps.len() - self.origin_index) as i64
    }

    /// Number of steps after time 0.
    pub fn forward_len(&self) -> usize {
        self.steps.len() - self.origin_index
    }

    /// Number of steps before time 0.
    pub fn backward_len(&self) -> usize {
        self.origin_index
    }

    pub fn contains_time(&self, t: i64) -> bool {
        t >= self.first_time() && t <= self.last_time()
    }

    /// Position at time `t`, computed by summing steps from the origin.
    pub fn position(&self, t: i64) -> LatticePoint {
        assert!(self.contains_time(t), "time {t} outside the path");
        let mut c = vec![0i32; self.dim];
        let o = self.origin_index as i64;
        if t >= 0 {
            for s in &self.steps[self.origin_index..(o + t) as usize] {
                c[s.axis()] += s.sign();
            }
        } else {
            for s in &self.steps[(o + t) as usize..self.origin_index] {
                c[s.axis()] -= s.sign();
            }
        }
        LatticePoint(c)
    }

    /// All positions in time order, flattened (`dim` coordinates per time).
    pub fn positions(&self) -> Vec<i32> {
        let d = self.dim;
        let mut out = Vec::with_capacity((self.steps.len() + 1) * d);
        let start = self.position(self.first_time());
        out.extend_from_slice(&start.0);
        let mut cur = start.0;
        for s in &self.steps {
            cur[s.axis()] += s.sign();
            out.extend_from_slice(&cur);
        }
        out
    }

    /// Site indexing of this path.
    pub fn trace(&self) -> Trace {
        Trace::new(self)
    }
}

/// Generate a simple random walk path.
///
/// Two-sided paths take `n_steps` on each side; the second walk uses an
/// independent stream derived from the same seed.
pub fn gen_path(dim: usize, n_steps: u64, seed: u64, sided: Sidedness) -> Result<WalkPath> {
    if dim == 0 {
        return Err(Error::InvalidInput("dimension must be at least 1".into()));
    }
    if dim > 127 {
        return Err(Error::InvalidInput(
            "dimension above 127 is not encodable".into(),
        ));
    }
    let total = match sided {
        Sidedness::OneSided => n_steps,
        Sidedness::TwoSided => n_steps.saturating_mul(2),
    };
    if total > STEP_BUDGET {
        return Err(Error::Capacity(format!(
            "{total} steps exceeds the budget of {STEP_BUDGET}"
        )));
    }
    let draw = |p: u64| -> Vec<Step> {
        let mut rng = rng::stream(seed, p);
        let k = 2 * dim as u8;
        (0..n_steps).map(|_| Step(rng.random_range(0..k))).collect()
    };
    let forward = draw(purpose::FORWARD_PATH);
    let mut path = match sided {
        Sidedness::OneSided => WalkPath::from_steps(dim, forward, 0, sided)?,
        Sidedness::TwoSided => {
            let backward = draw(purpose::BACKWARD_PATH);
            WalkPath::two_sided(dim, &forward, &backward)?
        }
    };
    path.seed = Some(seed);
    Ok(path)
}

const SIDECAR_MAGIC: &[u8; 4] = b"RWRW";
const SIDECAR_VERSION: u16 = 1;
const BACKWARD_FLAG: u8 = 0x80;

/// Write the binary replay file: magic, version, d, step count, seed, then
/// one byte per step. Steps before time 0 carry the high bit.
pub fn write_sidecar<W: Write>(path: &WalkPath, mut w: W) -> Result<()> {
    w.write_all(SIDECAR_MAGIC)?;
    w.write_all(&SIDECAR_VERSION.to_le_bytes())?;
    w.write_all(&(path.dim as u16).to_le_bytes())?;
    w.write_all(&(path.steps.len() as u64).to_le_bytes())?;
    w.write_all(&path.seed.unwrap_or(0).to_le_bytes())?;
    let body: Vec<u8> = path
        .steps
        .iter()
        .enumerate()
        .map(|(k, s)| {
            if k < path.origin_index {
                s.0 | BACKWARD_FLAG
            } else {
                s.0
            }
        })
        .collect();
    w.write_all(&body)?;
    Ok(())
}

pub fn read_sidecar<R: Read>(mut r: R) -> Result<WalkPath> {
    let mut head = [0u8; 24];
    r.read_exact(&mut head)?;
    if &head[0..4] != SIDECAR_MAGIC {
        return Err(Error::InvalidInput("bad sidecar magic".into()));
    }
    let version = u16::from_le_bytes([head[4], head[5]]);
    if version != SIDECAR_VERSION {
        return Err(Error::InvalidInput(format!(
            "unsupported sidecar version {version}"
        )));
    }
    let dim = u16::from_le_bytes([head[6], head[7]]) as usize;
    let n = u64::from_le_bytes(head[8..16].try_into().unwrap());
    let seed = u64::from_le_bytes(head[16..24].try_into().unwrap());
    if n > STEP_BUDGET {
        return Err(Error::Capacity(format!("{n} steps")));
    }
    let mut body = vec![0u8; n as usize];
    r.read_exact(&mut body)?;
    let origin_index = body.iter().take_while(|b| *b & BACKWARD_FLAG != 0).count();
    if body[origin_index..].iter().any(|b| b & BACKWARD_FLAG != 0) {
        return Err(Error::InvalidInput(
            "backward steps must precede forward steps".into(),
        ));
    }
    let steps = body.into_iter().map(|b| Step(b & !BACKWARD_FLAG)).collect();
    let sided = if origin_index > 0 {
        Sidedness::TwoSided
    } else {
        Sidedness::OneSided
    };
    let mut path = WalkPath::from_steps(dim, steps, origin_index, sided)?;
    path.seed = Some(seed);
    Ok(path)
}

/// Associative point -> site id lookup.
///
/// Coordinates are packed into one `u64` when every coordinate fits in
/// `64 / d` bits; otherwise boxed tuples are used as keys.
#[derive(Debug, Clone)]
pub enum PointIndex {
    Packed { bits: u32, map: FxHashMap<u64, u32> },
    Tuple(FxHashMap<Box<[i32]>, u32>),
}

impl PointIndex {
    /// Index able to hold points whose coordinates are bounded by `max_abs`.
    pub fn for_bound(dim: usize, max_abs: i64, capacity: usize) -> Self {
        let bits = (64 / dim as u32).min(32);
        if bits >= 2 && max_abs < (1i64 << (bits - 1)) {
            let mut map = FxHashMap::default();
            map.reserve(capacity);
            PointIndex::Packed { bits, map }
        } else {
            let mut map = FxHashMap::default();
            map.reserve(capacity);
            PointIndex::Tuple(map)
        }
    }

    #[inline]
    fn pack(bits: u32, coords: &[i32]) -> u64 {
        let offset = 1i64 << (bits - 1);
        let mut key = 0u64;
        for (axis, &c) in coords.iter().enumerate() {
            key |= ((c as i64 + offset) as u64) << (bits * axis as u32);
        }
        key
    }

    /// Return the existing id of `coords` or insert it as `next`.
    #[inline]
    pub fn get_or_insert(&mut self, coords: &[i32], next: u32) -> (u32, bool) {
        match self {
            PointIndex::Packed { bits, map } => {
                let key = Self::pack(*bits, coords);
                match map.entry(key) {
                    std::collections::hash_map::Entry::Occupied(e) => (*e.get(), false),
                    std::collections::hash_map::Entry::Vacant(e) => {
                        e.insert(next);
                        (next, true)
                    }
                }
            }
            PointIndex::Tuple(map) => {
                if let Some(&id) = map.get(coords) {
                    (id, false)
                } else {
                    map.insert(coords.into(), next);
                    (next, true)
                }
            }
        }
    }

    pub fn get(&self, coords: &[i32]) -> Option<u32> {
        match self {
            PointIndex::Packed { bits, map } => {
                let offset = 1i64 << (bits - 1);
                if coords.iter().any(|&c| (c as i64).abs() >= offset) {
                    return None;
                }
                map.get(&Self::pack(*bits, coords)).copied()
            }
            PointIndex::Tuple(map) => map.get(coords).copied(),
        }
    }

    pub fn is_packed(&self) -> bool {
        matches!(self, PointIndex::Packed { .. })
    }
}

/// The sites (distinct points) of a path, numbered in order of first visit,
/// and the site occupied at each time.
#[derive(Debug, Clone)]
pub struct Trace {
    dim: usize,
    origin_index: usize,
    sided: Sidedness,
    forward_len: usize,
    backward_len: usize,
    coords: Vec<i32>,
    site_at: Vec<u32>,
    index: PointIndex,
}

impl Trace {
    pub fn new(path: &WalkPath) -> Self {
        let d = path.dim;
        let start = path.position(path.first_time());
        let mut cur = start.0.clone();
        let mut max_abs = cur
            .iter()
            .map(|c| c.unsigned_abs() as i64)
            .max()
            .unwrap_or(0);
        for s in &path.steps {
            cur[s.axis()] += s.sign();
            max_abs = max_abs.max(cur[s.axis()].unsigned_abs() as i64);
        }
        let n = path.steps.len() + 1;
        let mut index = PointIndex::for_bound(d, max_abs, n / 2);
        let mut coords = Vec::with_capacity(n * d / 2);
        let mut site_at = Vec::with_capacity(n);
        let mut cur = start.0;
        let mut next = 0u32;
        let mut visit = |cur: &[i32], coords: &mut Vec<i32>, site_at: &mut Vec<u32>| {
            let (id, fresh) = index.get_or_insert(cur, next);
            if fresh {
                coords.extend_from_slice(cur);
                next += 1;
            }
            site_at.push(id);
        };
        visit(&cur, &mut coords, &mut site_at);
        for s in &path.steps {
            cur[s.axis()] += s.sign();
            visit(&cur, &mut coords, &mut site_at);
        }
        Trace {
            dim: d,
            origin_index: path.origin_index,
            sided: path.sided,
            forward_len: path.forward_len(),
            backward_len: path.backward_len(),
            coords,
            site_at,
            index,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sided(&self) -> Sidedness {
        self.sided
    }

    pub fn num_sites(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn first_time(&self) -> i64 {
        -(self.origin_index as i64)
    }

    pub fn last_time(&self) -> i64 {
        self.forward_len as i64
    }

    pub fn origin_index(&self) -> usize {
        self.origin_index
    }

    pub fn forward_len(&self) -> usize {
        self.forward_len
    }

    pub fn backward_len(&self) -> usize {
        self.backward_len
    }

    /// Site id at time `t`.
    #[inline]
    pub fn site(&self, t: i64) -> u32 {
        self.site_at[(t + self.origin_index as i64) as usize]
    }

    /// Site ids in time order from `first_time()`.
    pub fn sites(&self) -> &[u32] {
        &self.site_at
    }

    pub fn site_coords(&self, site: u32) -> &[i32] {
        let d = self.dim;
        &self.coords[site as usize * d..(site as usize + 1) * d]
    }

    pub fn all_coords(&self) -> &[i32] {
        &self.coords
    }

    pub fn lookup(&self, p: &LatticePoint) -> Option<u32> {
        self.index.get(&p.0)
    }

    pub fn index(&self) -> &PointIndex {
        &self.index
    }

    /// Last time each site is visited within the generated window.
    pub fn last_visits(&self) -> Vec<i64> {
        let mut last = vec![i64::MIN; self.num_sites()];
        let first = self.first_time();
        for (k, &s) in self.site_at.iter().enumerate() {
            last[s as usize] = first + k as i64;
        }
        last
    }
}

/// Cut-times of a path within its generated window.
///
/// `indices` holds every time in `window` passing the disjointness test
/// against the generated path; only those inside `exact_window` have a
/// future (and, for two-sided sets, a past) at least one guard gap long.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutTimeSet {
    pub sided: Sidedness,
    pub indices: Vec<i64>,
    pub window: (i64, i64),
    pub exact_window: (i64, i64),
}

impl CutTimeSet {
    pub fn is_exact(&self, t: i64) -> bool {
        t >= self.exact_window.0 && t <= self.exact_window.1
    }

    /// Cut-times inside the exact window, increasing.
    pub fn exact(&self) -> Vec<i64> {
        self.indices
            .iter()
            .copied()
            .filter(|&t| self.is_exact(t))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, t: i64) -> bool {
        self.indices.binary_search(&t).is_ok()
    }
}

/// Cut-times of the path behind `trace`.
///
/// A time `n` is a one-sided cut-time when `S[0, n]` and `S[n+1, end]` are
/// disjoint, and a two-sided cut-time when `S[start, n]` and `S[n+1, end]` are.
/// One backward sweep records last visits; a forward running maximum then
/// decides each candidate in O(1).
pub fn cut_times(trace: &Trace, sided: Sidedness, guard_fraction: f64) -> Result<CutTimeSet> {
    if sided == Sidedness::TwoSided && trace.sided != Sidedness::TwoSided {
        return Err(Error::InvalidInput(
            "two-sided cut-times need a two-sided path".into(),
        ));
    }
    if !(0.0..1.0).contains(&guard_fraction) {
        return Err(Error::InvalidInput(format!(
            "guard fraction {guard_fraction} not in [0,1)"
        )));
    }
    let last = trace.last_visits();
    let start = match sided {
        Sidedness::OneSided => 0,
        Sidedness::TwoSided => trace.first_time(),
    };
    let end = trace.last_time();
    let mut indices = Vec::new();
    let mut reach = i64::MIN;
    for t in start..end {
        reach = reach.max(last[trace.site(t) as usize]);
        if reach <= t {
            indices.push(t);
        }
    }
    let guard_f = (guard_fraction * trace.forward_len as f64).ceil() as i64;
    let exact_hi = end - guard_f.max(1);
    let exact_lo = match sided {
        Sidedness::OneSided => 0,
        Sidedness::TwoSided => start + (guard_fraction * trace.backward_len as f64).ceil() as i64,
    };
    Ok(CutTimeSet {
        sided,
        indices,
        window: (start, end - 1),
        exact_window: (exact_lo, exact_hi),
    })
}

/// Chronological loop erasure of `S_0..S_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopErasure {
    pub points: Vec<LatticePoint>,
    /// Time at which each surviving point entered the erased path.
    pub times: Vec<i64>,
}

impl LoopErasure {
    /// Number of edges of the erased path.
    pub fn edges(&self) -> usize {
        self.points.len() - 1
    }
}

struct Eraser {
    stack: Vec<(u32, i64)>,
    pos: Vec<u32>,
}

impl Eraser {
    fn new(num_sites: usize) -> Self {
        Eraser {
            stack: Vec::new(),
            pos: vec![u32::MAX; num_sites],
        }
    }

    #[inline]
    fn visit(&mut self, site: u32, t: i64) {
        let p = self.pos[site as usize];
        if p != u32::MAX {
            for (s, _) in self.stack.drain(p as usize + 1..) {
                self.pos[s as usize] = u32::MAX;
            }
        } else {
            self.pos[site as usize] = self.stack.len() as u32;
            self.stack.push((site, t));
        }
    }
}

fn check_forward(trace: &Trace, n: i64) -> Result<()> {
    if n < 0 || n > trace.last_time() {
        return Err(Error::InvalidInput(format!(
            "index {n} outside [0, {}]",
            trace.last_time()
        )));
    }
    Ok(())
}

/// Loop erasure of the path up to time `n`; `Y_n` is `edges()` of the result.
pub fn loop_erase(trace: &Trace, n: i64) -> Result<LoopErasure> {
    check_forward(trace, n)?;
    let mut er = Eraser::new(trace.num_sites());
    for t in 0..=n {
        er.visit(trace.site(t), t);
    }
    Ok(LoopErasure {
        points: er
            .stack
            .iter()
            .map(|&(s, _)| LatticePoint(trace.site_coords(s).to_vec()))
            .collect(),
        times: er.stack.iter().map(|&(_, t)| t).collect(),
    })
}

/// `Y_m` for every `m` in `0..=n`, in one streaming pass.
pub fn loop_erasure_lengths(trace: &Trace, n: i64) -> Result<Vec<u32>> {
    check_forward(trace, n)?;
    let mut er = Eraser::new(trace.num_sites());
    let mut out = Vec::with_capacity(n as usize + 1);
    for t in 0..=n {
        er.visit(trace.site(t), t);
        out.push(er.stack.len() as u32 - 1);
    }
    Ok(out)
}

/// Number of distinct points among `S_0..S_n`.
pub fn range_count(trace: &Trace, n: i64) -> Result<usize> {
    check_forward(trace, n)?;
    let mut seen = vec![false; trace.num_sites()];
    let mut count = 0;
    for t in 0..=n {
        let s = trace.site(t) as usize;
        if !seen[s] {
            seen[s] = true;
            count += 1;
        }
    }
    Ok(count)
}

/// Number of the points `S_0..S_n` retained after loop-erasing the whole
/// window `S_0..S_horizon`. Approximates the erasure of the infinite path;
/// the approximation degrades as `n` approaches `horizon`.
pub fn retained_count(trace: &Trace, n: i64, horizon: i64) -> Result<usize> {
    check_forward(trace, horizon)?;
    if n < 0 || n > horizon {
        return Err(Error::InvalidInput(format!(
            "index {n} outside [0, {horizon}]"
        )));
    }
    let mut er = Eraser::new(trace.num_sites());
    for t in 0..=horizon {
        er.visit(trace.site(t), t);
    }
    Ok(er.stack.iter().filter(|&&(_, t)| t <= n).count())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(d: usize, list: &[&[i32]]) -> Vec<LatticePoint> {
        list.iter()
            .map(|c| {
                assert_eq!(c.len(), d);
                LatticePoint(c.to_vec())
            })
            .collect()
    }

    fn straight(d: usize, n: usize) -> WalkPath {
        WalkPath::from_steps(d, vec![Step::new(0, false); n], 0, Sidedness::OneSided).unwrap()
    }

    #[test]
    fn empty_walk_is_the_origin() {
        let p = gen_path(1, 0, 99, Sidedness::OneSided).unwrap();
        assert_eq!(p.steps().len(), 0);
        assert_eq!(p.position(0), LatticePoint::origin(1));
        assert_eq!(p.trace().num_sites(), 1);
    }

    #[test]
    fn gen_path_is_deterministic() {
        let a = gen_path(4, 10_000, 5, Sidedness::TwoSided).unwrap();
        let b = gen_path(4, 10_000, 5, Sidedness::TwoSided).unwrap();
        assert_eq!(a, b);
        let c = gen_path(4, 10_000, 6, Sidedness::TwoSided).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn two_sided_negative_times_follow_second_walk() {
        let fwd = [Step::new(0, false), Step::new(1, false)];
        let bwd = [Step::new(2, true), Step::new(2, true)];
        let p = WalkPath::two_sided(3, &fwd, &bwd).unwrap();
        assert_eq!(p.position(0), LatticePoint::origin(3));
        assert_eq!(p.position(-1).0, vec![0, 0, -1]);
        assert_eq!(p.position(-2).0, vec![0, 0, -2]);
        assert_eq!(p.position(2).0, vec![1, 1, 0]);
        let flat = p.positions();
        assert_eq!(&flat[0..3], &[0, 0, -2]);
    }

    #[test]
    fn capacity_error_beyond_budget() {
        let e = gen_path(4, STEP_BUDGET + 1, 0, Sidedness::OneSided).unwrap_err();
        assert!(matches!(e, Error::Capacity(_)));
    }

    #[test]
    fn straight_line_every_interior_index_is_cut() {
        let p = straight(3, 50);
        let cuts = cut_times(&p.trace(), Sidedness::OneSided, 0.0).unwrap();
        assert_eq!(cuts.indices, (0..50).collect::<Vec<_>>());
    }

    #[test]
    fn revisited_origin_is_not_cut() {
        let p = WalkPath::from_points(&pts(1, &[&[0], &[1], &[0]])).unwrap();
        let cuts = cut_times(&p.trace(), Sidedness::OneSided, 0.0).unwrap();
        assert!(!cuts.contains(0));
        // the future {0} also meets S[0, 1]
        assert!(cuts.is_empty());
    }

    #[test]
    fn two_sided_mode_requires_two_sided_path() {
        let p = straight(2, 5);
        assert!(cut_times(&p.trace(), Sidedness::TwoSided, 0.1).is_err());
    }

    #[test]
    fn loop_erasure_of_single_loop() {
        let p = WalkPath::from_points(&pts(2, &[&[0, 0], &[1, 0], &[0, 0], &[0, 1]])).unwrap();
        let le = loop_erase(&p.trace(), 3).unwrap();
        assert_eq!(le.points, pts(2, &[&[0, 0], &[0, 1]]));
        assert_eq!(le.edges(), 1);
    }

    #[test]
    fn straight_line_erasure_and_range() {
        let p = straight(4, 20);
        let tr = p.trace();
        assert_eq!(loop_erase(&tr, 20).unwrap().edges(), 20);
        assert_eq!(range_count(&tr, 20).unwrap(), 21);
        assert_eq!(retained_count(&tr, 12, 20).unwrap(), 13);
    }

    #[test]
    fn range_count_with_backtrack() {
        let p = WalkPath::from_points(&pts(1, &[&[0], &[1], &[0]])).unwrap();
        assert_eq!(range_count(&p.trace(), 2).unwrap(), 2);
    }

    #[test]
    fn retained_count_keeps_first_visit_of_origin() {
        let p = WalkPath::from_points(&pts(2, &[&[0, 0], &[1, 0], &[0, 0], &[0, 1]])).unwrap();
        assert_eq!(retained_count(&p.trace(), 2, 3).unwrap(), 1);
    }

    #[test]
    fn sidecar_round_trip_two_sided() {
        let p = gen_path(5, 300, 11, Sidedness::TwoSided).unwrap();
        let mut buf = Vec::new();
        write_sidecar(&p, &mut buf).unwrap();
        assert_eq!(&buf[0..4], b"RWRW");
        assert_eq!(buf.len(), 24 + 600);
        let q = read_sidecar(buf.as_slice()).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn sidecar_rejects_bad_magic() {
        let mut buf = Vec::new();
        write_sidecar(&straight(2, 3), &mut buf).unwrap();
        buf[0] = b'X';
        assert!(read_sidecar(buf.as_slice()).is_err());
    }

    #[test]
    fn tuple_keys_used_for_wide_coordinates() {
        // 64/5 = 12 bits per axis: a straight walk of 5000 steps does not fit
        let p = WalkPath::from_steps(5, vec![Step::new(0, false); 5000], 0, Sidedness::OneSided)
            .unwrap();
        let tr = p.trace();
        assert!(!tr.index().is_packed());
        assert_eq!(tr.num_sites(), 5001);
        assert_eq!(tr.lookup(&LatticePoint(vec![4321, 0, 0, 0, 0])), Some(4321));
        let q = gen_path(5, 2000, 1, Sidedness::OneSided).unwrap();
        assert!(q.trace().index().is_packed());
    }

    #[test]
    fn from_points_rejects_jumps() {
        assert!(WalkPath::from_points(&pts(2, &[&[0, 0], &[1, 1]])).is_err());
        assert!(WalkPath::from_points(&pts(1, &[&[1]])).is_err());
    }
}
