//! Viewing graphs: representation, edge-list I/O and the cheap combinatorial
//! pre-tests (connectivity, biconnectivity, degree conditions, edge bound).

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Unordered edge stored as `(min, max)`.
pub type Edge = (usize, usize);

/// Undirected simple graph whose nodes are cameras and whose edges are the
/// available fundamental matrices.
///
/// Edge order is significant: it fixes the row-block layout of the Jacobian.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViewingGraph {
    node_count: usize,
    edges: Vec<Edge>,
}

impl ViewingGraph {
    /// Builds a graph from an explicit node count and edge list. Edges are
    /// canonicalized to `(min, max)`; order is preserved.
    pub fn new(node_count: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for (k, (a, b)) in edges.into_iter().enumerate() {
            if a == b {
                return Err(Error::SelfLoop {
                    line: k + 1,
                    node: a,
                });
            }
            if a >= node_count || b >= node_count {
                return Err(Error::NodeOutOfRange { a, b, node_count });
            }
            let e = (a.min(b), a.max(b));
            if !seen.insert(e) {
                return Err(Error::DuplicateEdge {
                    line: k + 1,
                    a: e.0,
                    b: e.1,
                });
            }
            out.push(e);
        }
        Ok(ViewingGraph {
            node_count,
            edges: out,
        })
    }

    /// Parses the whitespace-separated `i j` edge-list format. `#` starts a
    /// comment line; blank lines are skipped. The node count is one more than
    /// the largest index and every node must carry at least one edge.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut edges = Vec::new();
        let mut max_node = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut tokens = line.split_whitespace();
            let mut next = |what: &str| -> Result<usize> {
                let tok = tokens.next().ok_or_else(|| Error::Parse {
                    line: line_no,
                    message: format!("missing {what} node index"),
                })?;
                tok.parse::<usize>().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("invalid node index {tok:?}"),
                })
            };
            let a = next("first")?;
            let b = next("second")?;
            if let Some(extra) = tokens.next() {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("unexpected token {extra:?}"),
                });
            }
            if a == b {
                return Err(Error::SelfLoop {
                    line: line_no,
                    node: a,
                });
            }
            let e = (a.min(b), a.max(b));
            if !seen.insert(e) {
                return Err(Error::DuplicateEdge {
                    line: line_no,
                    a: e.0,
                    b: e.1,
                });
            }
            max_node = Some(max_node.map_or(e.1, |m: usize| m.max(e.1)));
            edges.push(e);
        }
        let node_count = max_node.map_or(0, |m| m + 1);
        let g = ViewingGraph { node_count, edges };
        if let Some(node) = g.degrees().iter().position(|&d| d == 0) {
            return Err(Error::NodeGap { node });
        }
        Ok(g)
    }

    /// Serializes to the edge-list format accepted by [`Self::parse_edge_list`].
    pub fn to_edge_list(&self) -> String {
        let mut s = String::new();
        for &(a, b) in &self.edges {
            s.push_str(&format!("{a} {b}\n"));
        }
        s
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn contains_edge(&self, a: usize, b: usize) -> bool {
        let e = (a.min(b), a.max(b));
        self.edges.contains(&e)
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.node_count];
        for &(a, b) in &self.edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        deg
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.node_count];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    /// Connected-component label for each node.
    pub fn component_labels(&self) -> (usize, Vec<usize>) {
        let adj = self.adjacency();
        let mut label = vec![usize::MAX; self.node_count];
        let mut count = 0;
        for start in 0..self.node_count {
            if label[start] != usize::MAX {
                continue;
            }
            let mut stack = vec![start];
            label[start] = count;
            while let Some(v) = stack.pop() {
                for &w in &adj[v] {
                    if label[w] == usize::MAX {
                        label[w] = count;
                        stack.push(w);
                    }
                }
            }
            count += 1;
        }
        (count, label)
    }

    pub fn is_connected(&self) -> bool {
        self.node_count <= 1 || self.component_labels().0 == 1
    }

    /// Cut vertices via iterative DFS low-link.
    pub fn articulation_points(&self) -> Vec<usize> {
        let n = self.node_count;
        let adj = self.adjacency();
        let mut disc = vec![usize::MAX; n];
        let mut low = vec![0usize; n];
        let mut is_cut = vec![false; n];
        let mut timer = 0;
        for root in 0..n {
            if disc[root] != usize::MAX {
                continue;
            }
            disc[root] = timer;
            low[root] = timer;
            timer += 1;
            let mut root_children = 0;
            // (node, parent, next neighbour index)
            let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
            while let Some(top) = stack.last_mut() {
                let (v, parent) = (top.0, top.1);
                if top.2 < adj[v].len() {
                    let w = adj[v][top.2];
                    top.2 += 1;
                    if disc[w] == usize::MAX {
                        disc[w] = timer;
                        low[w] = timer;
                        timer += 1;
                        if v == root {
                            root_children += 1;
                        }
                        stack.push((w, v, 0));
                    } else if w != parent {
                        low[v] = low[v].min(disc[w]);
                    }
                } else {
                    stack.pop();
                    if parent != usize::MAX {
                        low[parent] = low[parent].min(low[v]);
                        if parent != root && low[v] >= disc[parent] {
                            is_cut[parent] = true;
                        }
                    }
                }
            }
            if root_children > 1 {
                is_cut[root] = true;
            }
        }
        (0..n).filter(|&v| is_cut[v]).collect()
    }

    /// Connected with no cut vertex. A single edge counts as biconnected.
    pub fn is_biconnected(&self) -> bool {
        if self.node_count < 2 || self.edges.is_empty() {
            return false;
        }
        self.is_connected() && self.articulation_points().is_empty()
    }

    /// Signed incidence matrix, row-major `m × n`: row `e` for edge `(i, j)`
    /// holds −1 at column `i` and +1 at column `j`.
    pub fn incidence_matrix(&self) -> Vec<Vec<i8>> {
        self.edges
            .iter()
            .map(|&(a, b)| {
                let mut row = vec![0i8; self.node_count];
                row[a] = -1;
                row[b] = 1;
                row
            })
            .collect()
    }

    /// Subgraph made of the given edges, with nodes relabelled to
    /// `0..k` in increasing original order. Returns the subgraph and the
    /// original id of every new node.
    pub fn edge_subgraph(&self, edge_ids: &[usize]) -> (ViewingGraph, Vec<usize>) {
        let mut nodes: Vec<usize> = edge_ids
            .iter()
            .flat_map(|&e| [self.edges[e].0, self.edges[e].1])
            .collect();
        nodes.sort_unstable();
        nodes.dedup();
        let mut map = vec![usize::MAX; self.node_count];
        for (new, &old) in nodes.iter().enumerate() {
            map[old] = new;
        }
        let edges = edge_ids
            .iter()
            .map(|&e| {
                let (a, b) = self.edges[e];
                (map[a], map[b])
            })
            .collect();
        (
            ViewingGraph {
                node_count: nodes.len(),
                edges,
            },
            nodes,
        )
    }

    /// Applies a node permutation: node `v` becomes `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> ViewingGraph {
        let edges = self
            .edges
            .iter()
            .map(|&(a, b)| (perm[a].min(perm[b]), perm[a].max(perm[b])))
            .collect();
        ViewingGraph {
            node_count: self.node_count,
            edges,
        }
    }

    pub fn complete(n: usize) -> ViewingGraph {
        let edges = (0..n).flat_map(|j| (0..j).map(move |i| (i, j))).collect();
        ViewingGraph {
            node_count: n,
            edges,
        }
    }
}

impl fmt::Display for ViewingGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_edge_list())
    }
}

/// Outcome of the combinatorial necessary conditions for solvability.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NecessaryConditionResult {
    pub connected: bool,
    pub biconnected: bool,
    pub min_degree_ok: bool,
    /// No edge joins two nodes of degree at most two (the triangle excepted).
    pub no_adjacent_degree_two: bool,
    pub edge_bound_ok: bool,
    pub articulation_points: Vec<usize>,
}

impl NecessaryConditionResult {
    pub fn all_hold(&self) -> bool {
        self.connected
            && self.biconnected
            && self.min_degree_ok
            && self.no_adjacent_degree_two
            && self.edge_bound_ok
    }
}

/// ⌈(11n − 15) / 7⌉, clamped at zero.
pub fn minimal_edge_count(n: usize) -> usize {
    let num = 11 * n as i64 - 15;
    if num <= 0 {
        0
    } else {
        ((num + 6) / 7) as usize
    }
}

pub fn necessary_conditions(g: &ViewingGraph) -> NecessaryConditionResult {
    let deg = g.degrees();
    let connected = g.is_connected();
    let articulation_points = g.articulation_points();
    // the triangle is solvable although its degree-2 nodes are adjacent
    let is_triangle = g.node_count() == 3 && g.edge_count() == 3;
    let biconnected =
        g.node_count() >= 2 && !g.edges().is_empty() && connected && articulation_points.is_empty();
    NecessaryConditionResult {
        connected,
        biconnected,
        min_degree_ok: deg.iter().all(|&d| d >= 2),
        no_adjacent_degree_two: is_triangle
            || g.edges()
                .iter()
                .all(|&(a, b)| !(deg[a] <= 2 && deg[b] <= 2)),
        edge_bound_ok: g.edge_count() >= minimal_edge_count(g.node_count()),
        articulation_points,
    }
}
