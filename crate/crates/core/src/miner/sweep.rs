//! Random connected graphs at a given edge density, tested in bulk.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, ViewingGraph};
use crate::solvability::{derive_seeds, finite_solvability, maximal_components};

/// Attempts per sample before giving up on drawing a connected graph.
pub const CONNECT_RETRIES: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingModel {
    /// [`SamplingModel::EdgeCount`] when that many edges can connect the
    /// nodes, [`SamplingModel::SpanningTreePlus`] otherwise.
    #[default]
    Auto,
    /// Exactly `⌊d · n(n−1)/200⌋` edges drawn uniformly, redrawn until
    /// connected.
    EdgeCount,
    /// A uniform random spanning tree plus a fraction `d / 100` (rounded down) of the remaining
    /// pairs, drawn uniformly.
    SpanningTreePlus,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepOptions {
    pub model: SamplingModel,
    pub seed_count: usize,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub n: usize,
    pub density_percent: f64,
    pub samples: usize,
    pub fin_solv_count: usize,
    pub component_count_min: usize,
    pub component_count_max: usize,
    pub seed: u64,
    pub model: SamplingModel,
    /// Mean edge count of the sampled graphs.
    pub mean_edges: f64,
}

fn pair(index: usize) -> Edge {
    // inverse of index = j(j−1)/2 + i with i < j
    let mut j = ((1.0 + (1.0 + 8.0 * index as f64).sqrt()) / 2.0) as usize;
    while j * (j - 1) / 2 > index {
        j -= 1;
    }
    while (j + 1) * j / 2 <= index {
        j += 1;
    }
    (index - j * (j - 1) / 2, j)
}

/// Uniform labelled tree via a random Prüfer sequence.
fn random_tree(n: usize, rng: &mut ChaCha8Rng) -> Vec<Edge> {
    if n < 2 {
        return Vec::new();
    }
    let code: Vec<usize> = (0..n.saturating_sub(2))
        .map(|_| rng.random_range(0..n))
        .collect();
    let mut degree = vec![1usize; n];
    for &c in &code {
        degree[c] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &c in &code {
        let leaf = (0..n).find(|&v| degree[v] == 1).expect("a leaf exists");
        edges.push((leaf.min(c), leaf.max(c)));
        degree[leaf] -= 1;
        degree[c] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}

/// One connected random graph on `n` nodes.
pub fn sample_connected_graph(
    n: usize,
    density_percent: f64,
    model: SamplingModel,
    rng: &mut ChaCha8Rng,
) -> Result<ViewingGraph> {
    let pairs = n * (n - 1) / 2;
    let literal_edges = (density_percent * pairs as f64 / 100.0).floor() as usize;
    let model = match model {
        SamplingModel::Auto if literal_edges + 1 >= n => SamplingModel::EdgeCount,
        SamplingModel::Auto => SamplingModel::SpanningTreePlus,
        other => other,
    };
    match model {
        SamplingModel::EdgeCount => {
            let m = literal_edges;
            if m + 1 < n {
                return Err(Error::OutOfRange(format!(
                    "{m} edges cannot connect {n} nodes at density {density_percent}%"
                )));
            }
            for _ in 0..CONNECT_RETRIES {
                let mut idx = sample(rng, pairs, m).into_vec();
                idx.sort_unstable();
                let g = ViewingGraph::new(n, idx.into_iter().map(pair))?;
                if g.is_connected() {
                    return Ok(g);
                }
            }
            Err(Error::OutOfRange(format!(
                "no connected graph in {CONNECT_RETRIES} draws at density {density_percent}%"
            )))
        }
        SamplingModel::SpanningTreePlus => {
            let tree = random_tree(n, rng);
            let mut taken = vec![false; pairs];
            for &(a, b) in &tree {
                taken[b * (b - 1) / 2 + a] = true;
            }
            let free: Vec<usize> = (0..pairs).filter(|&k| !taken[k]).collect();
            let extra = (density_percent * free.len() as f64 / 100.0).floor() as usize;
            for k in sample(rng, free.len(), extra) {
                taken[free[k]] = true;
            }
            let edges = taken
                .iter()
                .enumerate()
                .filter(|(_, &t)| t)
                .map(|(k, _)| pair(k));
            ViewingGraph::new(n, edges)
        }
        SamplingModel::Auto => unreachable!("resolved above"),
    }
}

/// Tests `samples` random connected graphs. Solvable graphs count as one
/// component; the others are partitioned.
pub fn density_sweep(
    n: usize,
    density_percent: f64,
    samples: usize,
    seed: u64,
    options: &SweepOptions,
) -> Result<SweepResult> {
    if !(density_percent > 0.0 && density_percent <= 100.0) {
        return Err(Error::OutOfRange(format!(
            "density {density_percent} outside (0, 100]"
        )));
    }
    if samples == 0 {
        return Err(Error::OutOfRange("samples must be at least 1".into()));
    }
    if n < 2 {
        return Err(Error::OutOfRange(format!("node count {n} below 2")));
    }
    let sample_seeds = derive_seeds(seed, samples);
    let outcomes: Vec<(bool, usize, usize)> = sample_seeds
        .par_iter()
        .map(|&s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let g = sample_connected_graph(n, density_percent, options.model, &mut rng)?;
            let seeds = derive_seeds(s, options.seed_count);
            let report = finite_solvability(&g, &seeds, options.tolerance)?;
            let comps = if report.finite_solvable {
                1
            } else {
                maximal_components(&g, &seeds, options.tolerance)?.len()
            };
            Ok((report.finite_solvable, comps, g.edge_count()))
        })
        .collect::<Result<_>>()?;
    let counts = outcomes.iter().map(|o| o.1);
    Ok(SweepResult {
        n,
        density_percent,
        samples,
        fin_solv_count: outcomes.iter().filter(|o| o.0).count(),
        component_count_min: counts.clone().min().unwrap_or(0),
        component_count_max: counts.max().unwrap_or(0),
        seed,
        model: options.model,
        mean_edges: outcomes.iter().map(|o| o.2 as f64).sum::<f64>() / samples as f64,
    })
}
