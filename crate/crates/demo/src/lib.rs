//! Browser bindings: draw a range with its cut-points, run a walker on it,
//! and plot exact return probabilities.
//!
//! Build with `wasm-pack build crates/demo --target web --out-dir www/pkg`
//! and serve `crates/demo/www/`.

use rangewalk::rng::{purpose, stream};
use rangewalk::walk::{return_probabilities, simulate};
use rangewalk::{ConductanceMode, ConductanceNetwork, Environment, Sidedness};
use wasm_bindgen::prelude::*;

const MAX_STEPS: u32 = 1 << 20;

fn mode(weighted: bool) -> ConductanceMode {
    if weighted {
        ConductanceMode::CrossingCount
    } else {
        ConductanceMode::Unit
    }
}

fn check_dim(dim: usize) -> Result<(), String> {
    if (2..=8).contains(&dim) {
        Ok(())
    } else {
        Err(format!("dimension {dim} outside 2..=8"))
    }
}

/// A one-sided range projected on its first two coordinates.
#[wasm_bindgen]
pub struct RangeView {
    path: Vec<i32>,
    cuts: Vec<i32>,
    walk: Vec<i32>,
    censored: bool,
}

#[wasm_bindgen]
impl RangeView {
    /// Path positions as interleaved `x, y`.
    #[wasm_bindgen(getter)]
    pub fn path(&self) -> Vec<i32> {
        self.path.clone()
    }

    /// Exact cut-points as interleaved `x, y`.
    #[wasm_bindgen(getter)]
    pub fn cuts(&self) -> Vec<i32> {
        self.cuts.clone()
    }

    /// Walker positions as interleaved `x, y`; empty unless requested.
    #[wasm_bindgen(getter)]
    pub fn walk(&self) -> Vec<i32> {
        self.walk.clone()
    }

    /// Whether the walker was stopped at a guard cut-point.
    #[wasm_bindgen(getter)]
    pub fn censored(&self) -> bool {
        self.censored
    }
}

fn xy(c: &[i32]) -> [i32; 2] {
    [c[0], c[1]]
}

pub fn build_view(
    dim: usize,
    steps: u32,
    seed: u32,
    walk_steps: u32,
    weighted: bool,
) -> Result<RangeView, String> {
    check_dim(dim)?;
    if steps < 16 || steps > MAX_STEPS || walk_steps > MAX_STEPS {
        return Err(format!("steps must lie in 16..={MAX_STEPS}"));
    }
    let env = Environment::generate(dim, steps as u64, seed as u64, Sidedness::OneSided)
        .map_err(|e| e.to_string())?;
    let g = &env.graph;
    let path = (0..=steps as i64)
        .flat_map(|t| xy(g.coords(g.vertex_at(t))))
        .collect();
    let cuts = env
        .cuts
        .exact()
        .into_iter()
        .flat_map(|t| xy(g.coords(g.vertex_at(t))))
        .collect();
    let (walk, censored) = if walk_steps > 0 {
        let net = ConductanceNetwork::with_mode(g, mode(weighted));
        let rng = stream(seed as u64, purpose::WALKER);
        let t = simulate(&net, env.root(), walk_steps as u64, rng, &env.guards)
            .map_err(|e| e.to_string())?;
        (
            t.vertices.iter().flat_map(|&v| xy(g.coords(v))).collect(),
            t.censored,
        )
    } else {
        (Vec::new(), false)
    };
    Ok(RangeView {
        path,
        cuts,
        walk,
        censored,
    })
}

/// The range of `steps` walk steps in `Z^dim`, its exact cut-points and,
/// when `walk_steps > 0`, a walker of that length started at the origin.
#[wasm_bindgen(js_name = rangeView)]
pub fn range_view(
    dim: usize,
    steps: u32,
    seed: u32,
    walk_steps: u32,
    weighted: bool,
) -> Result<RangeView, JsError> {
    build_view(dim, steps, seed, walk_steps, weighted).map_err(|e| JsError::new(&e))
}

/// `P(X_{2n} = 0)` for `n = 0..=n_max`.
pub fn return_series(
    dim: usize,
    n_max: u32,
    seed: u32,
    weighted: bool,
) -> Result<Vec<f64>, String> {
    check_dim(dim)?;
    if !(1..=1 << 14).contains(&n_max) {
        return Err("n_max must lie in 1..=16384".into());
    }
    let env = Environment::with_safe_radius(dim, seed as u64, Sidedness::OneSided, n_max)
        .map_err(|e| e.to_string())?;
    let net = ConductanceNetwork::with_mode(&env.graph, mode(weighted));
    let p = return_probabilities(&net, env.root(), 2 * n_max, env.safe_radius)
        .map_err(|e| e.to_string())?;
    Ok(p.into_iter().step_by(2).collect())
}

/// Exact return probabilities at even times on one environment.
#[wasm_bindgen(js_name = returnCurve)]
pub fn return_curve(
    dim: usize,
    n_max: u32,
    seed: u32,
    weighted: bool,
) -> Result<Vec<f64>, JsError> {
    return_series(dim, n_max, seed, weighted).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn view_shapes() {
        let v = build_view(3, 500, 7, 200, false).unwrap();
        assert_eq!(v.path.len(), 2 * 501);
        assert_eq!(&v.path[..2], &[0, 0]);
        assert!(v.cuts.len() % 2 == 0 && !v.cuts.is_empty());
        assert!(v.walk.len() <= 2 * 201 && v.walk.len() >= 2);
        assert!(build_view(1, 500, 7, 0, false).is_err());
    }

    #[test]
    fn return_series_starts_at_one() {
        let p = return_series(4, 64, 3, true).unwrap();
        assert_eq!(p.len(), 65);
        assert_eq!(p[0], 1.0);
        assert!(p.iter().all(|&x| (0.0..=1.0).contains(&x)));
    }
}
