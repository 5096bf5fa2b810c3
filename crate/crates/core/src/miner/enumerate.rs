//! Isomorphism-free generation of minimally-solvable candidates: biconnected
//! graphs on `n` nodes with ⌈(11n − 15)/7⌉ edges.
//!
//! Graphs are grown one edge at a time from the empty graph; each level is
//! deduplicated by canonical code. Partial graphs that can no longer reach
//! minimum degree two with the edges left are dropped early.

use std::collections::BTreeMap;

use super::canon::{canonical_form, SmallGraph};
use crate::error::{Error, Result};
use crate::graph::{minimal_edge_count, ViewingGraph};

pub const MIN_NODES: usize = 3;
/// Largest node count enumerated by default.
pub const DESK_MAX_NODES: usize = 8;
/// Hard upper limit (slow beyond the desk range).
pub const MAX_NODES: usize = 10;

fn degree_deficit(g: &SmallGraph) -> usize {
    (0..g.n).map(|v| 2usize.saturating_sub(g.degree(v))).sum()
}

/// All non-isomorphic graphs on `n` nodes with `edges` edges and minimum
/// degree at least two, keyed by canonical code.
fn grow(n: usize, edges: usize) -> BTreeMap<u128, SmallGraph> {
    let mut level: BTreeMap<u128, SmallGraph> = BTreeMap::new();
    let empty = SmallGraph::empty(n);
    level.insert(canonical_form(&empty).code, empty);
    for size in 0..edges {
        let left_after = edges - size - 1;
        let mut next = BTreeMap::new();
        for g in level.values() {
            for j in 0..n {
                for i in 0..j {
                    if g.has_edge(i, j) {
                        continue;
                    }
                    let mut h = *g;
                    h.add_edge(i, j);
                    // each future edge lowers the deficit by at most two
                    if degree_deficit(&h) > 2 * left_after {
                        continue;
                    }
                    let c = canonical_form(&h);
                    next.entry(c.code).or_insert(c.graph);
                }
            }
        }
        level = next;
    }
    level
}

/// Candidates in canonical form, ordered by canonical code.
pub fn enumerate_candidates(n: usize) -> Result<Vec<(u128, ViewingGraph)>> {
    if !(MIN_NODES..=MAX_NODES).contains(&n) {
        return Err(Error::OutOfRange(format!(
            "node count {n} outside {MIN_NODES}..={MAX_NODES}"
        )));
    }
    let target = minimal_edge_count(n);
    Ok(grow(n, target)
        .into_iter()
        .map(|(code, g)| (code, g.to_graph()))
        .filter(|(_, g)| g.is_biconnected())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_counts() {
        assert_eq!(enumerate_candidates(3).unwrap().len(), 1);
        assert_eq!(enumerate_candidates(4).unwrap().len(), 1);
        assert_eq!(enumerate_candidates(5).unwrap().len(), 2);
        assert_eq!(enumerate_candidates(6).unwrap().len(), 9);
    }

    #[test]
    fn candidates_are_biconnected_with_target_edges() {
        for n in 3..=7 {
            for (_, g) in enumerate_candidates(n).unwrap() {
                assert!(g.is_biconnected());
                assert_eq!(g.edge_count(), minimal_edge_count(n));
                assert_eq!(g.node_count(), n);
            }
        }
    }

    #[test]
    fn out_of_range_node_counts() {
        assert!(enumerate_candidates(2).is_err());
        assert!(enumerate_candidates(11).is_err());
    }

    #[test]
    fn level_counts_match_known_graph_counts() {
        // non-isomorphic graphs on 4 nodes by edge count: 1 1 2 3 2 1 1,
        // of which min-degree ≥ 2 with 4, 5, 6 edges: C4; K4 − e; K4
        assert_eq!(grow(4, 4).len(), 1);
        assert_eq!(grow(4, 5).len(), 1);
        assert_eq!(grow(4, 6).len(), 1);
        // 5 nodes, 5 edges, min degree 2: only C5
        assert_eq!(grow(5, 5).len(), 1);
    }
}
