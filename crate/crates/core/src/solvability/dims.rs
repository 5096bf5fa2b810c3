//! Row and column counts of three solvability-matrix formulations.

use serde::{Deserialize, Serialize};

use crate::graph::ViewingGraph;

/// Equations (rows) and unknowns (columns) per formulation:
/// triplet-based (`e1`, `v12`), reduced edge-based (`e2`, `v12`) and the
/// node-based Jacobian used here (`e3`, `v3`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixDims {
    pub nodes: usize,
    pub edges: usize,
    /// `40 m²/n − 19m + 15`
    pub e1_lower_bound: f64,
    /// `10 Σ dᵢ² − 19m + 15`
    pub e1: i64,
    /// `23m − 11n + 15`
    pub e2: i64,
    /// `10m + n + 15`
    pub e3: usize,
    /// `16m`
    pub v12: usize,
    /// `12n`
    pub v3: usize,
}

pub fn matrix_dims(g: &ViewingGraph) -> MatrixDims {
    let n = g.node_count();
    let m = g.edge_count();
    let (ni, mi) = (n as i64, m as i64);
    let sum_sq: i64 = g.degrees().iter().map(|&d| (d * d) as i64).sum();
    let e1_lower_bound = if n == 0 {
        f64::NAN
    } else {
        40.0 * (m * m) as f64 / n as f64 - 19.0 * m as f64 + 15.0
    };
    MatrixDims {
        nodes: n,
        edges: m,
        e1_lower_bound,
        e1: 10 * sum_sq - 19 * mi + 15,
        e2: 23 * mi - 11 * ni + 15,
        e3: 10 * m + n + 15,
        v12: 16 * m,
        v3: 12 * n,
    }
}
