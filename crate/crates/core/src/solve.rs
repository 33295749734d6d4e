//! Dirichlet problems for the weighted graph Laplacian.
//!
//! Unknowns live on an `interior` vertex set; `fixed` vertices carry
//! prescribed values; every other vertex is outside the problem and its
//! edges are ignored. Interior equations read
//! `sum_y c_xy (v_x - v_y) = rhs(x)`.

use nalgebra::{DMatrix, DVector};
use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::resistance::ConductanceNetwork;

/// Systems with fewer unknowns than this are solved densely under [`Method::Auto`].
pub const DENSE_CUTOFF: usize = 2000;

/// Relative residual at which conjugate gradients stops.
pub const CG_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    Auto,
    ConjugateGradient,
    Dense,
}

/// Iteration cap for a system with `n` unknowns.
pub fn cg_iteration_cap(n: usize) -> usize {
    ((20.0 * (n as f64).sqrt()).ceil() as usize)
        .max(4 * n)
        .max(50)
}

/// Reduced Laplacian in row-compressed form.
struct LocalSystem {
    diag: Vec<f64>,
    row_start: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
    rhs: Vec<f64>,
}

impl LocalSystem {
    fn n(&self) -> usize {
        self.diag.len()
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for i in 0..self.n() {
            let mut acc = self.diag[i] * x[i];
            for k in self.row_start[i]..self.row_start[i + 1] {
                acc -= self.vals[k] * x[self.cols[k] as usize];
            }
            out[i] = acc;
        }
    }
}

/// Solution of a Dirichlet problem.
#[derive(Debug, Clone)]
pub struct Solution {
    local: FxHashMap<u32, u32>,
    values: Vec<f64>,
    fixed: FxHashMap<u32, f64>,
    pub iterations: usize,
}

impl Solution {
    /// Value at `v`, or `None` when `v` is outside the problem.
    pub fn value(&self, v: u32) -> Option<f64> {
        self.local
            .get(&v)
            .map(|&i| self.values[i as usize])
            .or_else(|| self.fixed.get(&v).copied())
    }

    pub fn interior_values(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.local
            .iter()
            .map(|(&v, &i)| (v, self.values[i as usize]))
    }

    pub fn in_problem(&self, v: u32) -> bool {
        self.local.contains_key(&v) || self.fixed.contains_key(&v)
    }

    /// Net current leaving `v` into the problem region,
    /// `sum_y c_vy (u_v - u_y)`.
    pub fn current_out(&self, net: &ConductanceNetwork, v: u32) -> f64 {
        let uv = self.value(v).unwrap_or(0.0);
        net.edges_of(v)
            .filter_map(|(y, c)| self.value(y).map(|uy| c * (uv - uy)))
            .sum()
    }
}

/// Solve the Dirichlet problem.
pub fn solve<F: Fn(u32) -> f64>(
    net: &ConductanceNetwork,
    interior: &[u32],
    fixed: &[(u32, f64)],
    rhs: F,
    method: Method,
) -> Result<Solution> {
    let n_vertices = net.graph().num_vertices();
    let mut local = FxHashMap::default();
    local.reserve(interior.len());
    for (i, &v) in interior.iter().enumerate() {
        if v as usize >= n_vertices {
            return Err(Error::InvalidVertex(v));
        }
        if local.insert(v, i as u32).is_some() {
            return Err(Error::InvalidInput(format!("vertex {v} listed twice")));
        }
    }
    let mut fixed_map = FxHashMap::default();
    for &(v, val) in fixed {
        if v as usize >= n_vertices {
            return Err(Error::InvalidVertex(v));
        }
        if local.contains_key(&v) {
            return Err(Error::InvalidInput(format!(
                "vertex {v} both interior and fixed"
            )));
        }
        fixed_map.insert(v, val);
    }

    let n = interior.len();
    let mut sys = LocalSystem {
        diag: vec![0.0; n],
        row_start: Vec::with_capacity(n + 1),
        cols: Vec::new(),
        vals: Vec::new(),
        rhs: vec![0.0; n],
    };
    let mut anchored = vec![false; n];
    sys.row_start.push(0);
    for (i, &x) in interior.iter().enumerate() {
        let mut b = rhs(x);
        for (y, c) in net.edges_of(x) {
            if let Some(&j) = local.get(&y) {
                sys.diag[i] += c;
                sys.cols.push(j);
                sys.vals.push(c);
            } else if let Some(&val) = fixed_map.get(&y) {
                sys.diag[i] += c;
                b += c * val;
                anchored[i] = true;
            }
        }
        sys.rhs[i] = b;
        sys.row_start.push(sys.cols.len());
    }
    check_anchored(&sys, anchored)?;

    let (values, iterations) = match method {
        Method::Dense => (dense_solve(&sys)?, 0),
        Method::ConjugateGradient => conjugate_gradient(&sys, CG_TOLERANCE)?,
        Method::Auto if n < DENSE_CUTOFF => (dense_solve(&sys)?, 0),
        Method::Auto => conjugate_gradient(&sys, CG_TOLERANCE)?,
    };
    Ok(Solution {
        local,
        values,
        fixed: fixed_map,
        iterations,
    })
}

/// Every interior component must touch a fixed vertex, otherwise the
/// reduced Laplacian is singular.
fn check_anchored(sys: &LocalSystem, mut reached: Vec<bool>) -> Result<()> {
    let mut stack: Vec<usize> = (0..sys.n()).filter(|&i| reached[i]).collect();
    while let Some(i) = stack.pop() {
        for k in sys.row_start[i]..sys.row_start[i + 1] {
            let j = sys.cols[k] as usize;
            if !reached[j] {
                reached[j] = true;
                stack.push(j);
            }
        }
    }
    match reached.iter().position(|r| !r) {
        Some(i) => Err(Error::Singular(format!(
            "interior unknown {i} is not connected to any fixed vertex"
        ))),
        None => Ok(()),
    }
}

fn dense_solve(sys: &LocalSystem) -> Result<Vec<f64>> {
    let n = sys.n();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = sys.diag[i];
        for k in sys.row_start[i]..sys.row_start[i + 1] {
            m[(i, sys.cols[k] as usize)] -= sys.vals[k];
        }
    }
    let chol = m
        .cholesky()
        .ok_or_else(|| Error::Singular("reduced Laplacian is not positive definite".into()))?;
    let x = chol.solve(&DVector::from_column_slice(&sys.rhs));
    Ok(x.iter().copied().collect())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Jacobi-preconditioned conjugate gradients.
fn conjugate_gradient(sys: &LocalSystem, tol: f64) -> Result<(Vec<f64>, usize)> {
    let n = sys.n();
    let mut x = vec![0.0; n];
    let b_norm = dot(&sys.rhs, &sys.rhs).sqrt();
    if n == 0 || b_norm == 0.0 {
        return Ok((x, 0));
    }
    let inv_diag: Vec<f64> = sys.diag.iter().map(|d| 1.0 / d).collect();
    let mut r = sys.rhs.clone();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, b)| a * b).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let cap = cg_iteration_cap(n);
    let mut res = 1.0;
    for it in 1..=cap {
        sys.apply(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        res = dot(&r, &r).sqrt() / b_norm;
        if res <= tol {
            return Ok((x, it));
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::NoConvergence {
        iterations: cap,
        residual: res,
    })
}
