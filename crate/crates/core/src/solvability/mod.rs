//! Finite-solvability test and maximal-component extraction.

pub mod components;
pub mod dims;
pub mod exact;
pub mod jacobian;
pub mod rank;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{fundamental_assignment, random_generic_configuration};
use crate::graph::{Edge, ViewingGraph};

pub use components::{maximal_components, Component, ComponentPartition, ZERO_BLOCK_TOL};
pub use dims::{matrix_dims, MatrixDims};
pub use exact::{finite_field_rank, finite_field_verdict, DEFAULT_PRIME};
pub use jacobian::{assemble_jacobian, JacobianSystem, RowBlock, RowBlockKind};
pub use rank::{is_full_column_rank, null_space_basis, RankMethod, RankTest, DEFAULT_TOLERANCE};

/// SplitMix64 step, used to derive independent seeds from one master seed.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seeds(master: u64, count: usize) -> Vec<u64> {
    (0..count as u64)
        .map(|k| splitmix64(master ^ splitmix64(k)))
        .collect()
}

/// Verdict of a single random configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedVerdict {
    pub seed: u64,
    pub finite_solvable: bool,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub jacobian_rank: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolvabilityReport {
    pub finite_solvable: bool,
    pub nodes: usize,
    pub edges: usize,
    pub connected: bool,
    pub connected_pieces: usize,
    /// Rank of the constraint block `J_P`, i.e. `rank(J) − (n + 15)`.
    pub rank_jp: usize,
    /// `11n − 15`.
    pub expected_rank: i64,
    pub jacobian_rows: usize,
    pub jacobian_cols: usize,
    pub jacobian_rank: usize,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub tolerance: f64,
    pub method: RankMethod,
    pub gauge_edge: Edge,
    pub seeds: Vec<u64>,
    pub agreement: Vec<SeedVerdict>,
    pub seeds_agree: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time: Option<f64>,
}

/// One rank test at the configuration drawn from `seed`.
pub fn jacobian_for_seed(g: &ViewingGraph, seed: u64, gauge: Edge) -> Result<JacobianSystem> {
    let config = random_generic_configuration(g, seed)?;
    let fmats = fundamental_assignment(g, &config)?;
    assemble_jacobian(g, &config, &fmats, gauge)
}

pub fn test_seed(
    g: &ViewingGraph,
    seed: u64,
    gauge: Edge,
    tolerance: f64,
) -> Result<(RankTest, JacobianSystem)> {
    let j = jacobian_for_seed(g, seed, gauge)?;
    let test = is_full_column_rank(&j, tolerance)?;
    Ok((test, j))
}

/// Finite-solvability decision with the default (first) gauge edge.
pub fn finite_solvability(
    g: &ViewingGraph,
    seeds: &[u64],
    tolerance: f64,
) -> Result<SolvabilityReport> {
    let gauge = *g.edges().first().ok_or(Error::NoEdges)?;
    finite_solvability_with_gauge(g, seeds, tolerance, gauge)
}

/// Runs the rank test once per seed and takes the majority verdict (ties
/// count as not solvable). Disconnected graphs are never finite solvable.
pub fn finite_solvability_with_gauge(
    g: &ViewingGraph,
    seeds: &[u64],
    tolerance: f64,
    gauge: Edge,
) -> Result<SolvabilityReport> {
    if seeds.is_empty() {
        return Err(Error::EmptySeeds);
    }
    if g.edge_count() == 0 {
        return Err(Error::NoEdges);
    }
    let start = Instant::now();
    let (pieces, _) = g.component_labels();
    let mut agreement = Vec::with_capacity(seeds.len());
    let mut first: Option<(RankTest, usize, usize)> = None;
    for &seed in seeds {
        let (test, j) = test_seed(g, seed, gauge, tolerance)?;
        if first.is_none() {
            first = Some((test, j.rows(), j.cols()));
        }
        agreement.push(SeedVerdict {
            seed,
            finite_solvable: test.full_rank,
            sigma_min: test.sigma_min,
            sigma_max: test.sigma_max,
            jacobian_rank: test.rank,
        });
    }
    let votes = agreement.iter().filter(|v| v.finite_solvable).count();
    let majority = 2 * votes > agreement.len();
    let seeds_agree = votes == 0 || votes == agreement.len();
    let (first_test, rows, cols) = first.expect("at least one seed");
    // report the numbers of the first seed that voted with the majority
    let rep = agreement
        .iter()
        .find(|v| v.finite_solvable == majority)
        .expect("majority has a member");

    let n = g.node_count();
    let aux = jacobian::auxiliary_rows(n);
    Ok(SolvabilityReport {
        finite_solvable: majority && pieces == 1,
        nodes: n,
        edges: g.edge_count(),
        connected: pieces == 1,
        connected_pieces: pieces,
        rank_jp: rep.jacobian_rank.saturating_sub(aux),
        expected_rank: 11 * n as i64 - 15,
        jacobian_rows: rows,
        jacobian_cols: cols,
        jacobian_rank: rep.jacobian_rank,
        sigma_min: rep.sigma_min,
        sigma_max: rep.sigma_max,
        tolerance,
        method: first_test.method,
        gauge_edge: gauge,
        seeds: seeds.to_vec(),
        agreement,
        seeds_agree,
        wall_time: Some(start.elapsed().as_secs_f64()),
    })
}
