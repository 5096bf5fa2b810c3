//! Canonical labeling for small graphs (at most 16 nodes).
//!
//! Nodes are first split into an ordered, isomorphism-invariant partition by
//! iterated degree refinement. The canonical code is the smallest
//! upper-triangle adjacency bit string over all labelings that respect that
//! partition, found by depth-first search with prefix pruning.

use crate::graph::ViewingGraph;

pub const MAX_NODES: usize = 16;

/// Adjacency bitmasks of a graph with at most [`MAX_NODES`] nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SmallGraph {
    pub n: usize,
    pub adj: [u16; MAX_NODES],
}

impl SmallGraph {
    pub fn empty(n: usize) -> Self {
        assert!(n <= MAX_NODES);
        SmallGraph {
            n,
            adj: [0; MAX_NODES],
        }
    }

    pub fn from_graph(g: &ViewingGraph) -> Self {
        let mut s = SmallGraph::empty(g.node_count());
        for &(a, b) in g.edges() {
            s.add_edge(a, b);
        }
        s
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a] >> b & 1 == 1
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        self.adj[a] |= 1 << b;
        self.adj[b] |= 1 << a;
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].count_ones() as usize
    }

    pub fn edge_count(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).sum::<usize>() / 2
    }

    /// Edges in `(i, j)`, `i < j`, order of increasing `j` then `i`.
    pub fn to_graph(&self) -> ViewingGraph {
        let edges: Vec<(usize, usize)> = (0..self.n)
            .flat_map(|j| (0..j).map(move |i| (i, j)))
            .filter(|&(i, j)| self.has_edge(i, j))
            .collect();
        ViewingGraph::new(self.n, edges).expect("bitmask graph is simple")
    }

    /// Relabels so that the node at position `k` of `order` becomes node `k`.
    pub fn permuted(&self, order: &[usize]) -> SmallGraph {
        let mut out = SmallGraph::empty(self.n);
        for (i, &vi) in order.iter().enumerate() {
            for (j, &vj) in order.iter().enumerate().skip(i + 1) {
                if self.has_edge(vi, vj) {
                    out.add_edge(i, j);
                }
            }
        }
        out
    }
}

/// Canonical code plus the relabelled representative.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Canonical {
    pub code: u128,
    pub graph: SmallGraph,
}

/// Ordered equitable partition: list of cells, each a list of nodes.
fn refine(g: &SmallGraph) -> Vec<Vec<usize>> {
    let n = g.n;
    let degrees: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let mut distinct = degrees.clone();
    distinct.sort_unstable();
    distinct.dedup();
    let mut cell_of: Vec<usize> = degrees
        .iter()
        .map(|d| distinct.binary_search(d).expect("present"))
        .collect();
    let mut cells = distinct.len();
    loop {
        let signatures: Vec<(usize, Vec<usize>)> = (0..n)
            .map(|v| {
                let mut counts = vec![0; cells];
                for w in 0..n {
                    if g.has_edge(v, w) {
                        counts[cell_of[w]] += 1;
                    }
                }
                (cell_of[v], counts)
            })
            .collect();
        let mut sorted: Vec<&(usize, Vec<usize>)> = signatures.iter().collect();
        sorted.sort();
        sorted.dedup();
        let next: Vec<usize> = signatures
            .iter()
            .map(|s| sorted.binary_search(&s).expect("signature present"))
            .collect();
        let next_cells = sorted.len();
        cell_of = next;
        if next_cells == cells {
            break;
        }
        cells = next_cells;
    }
    let mut out = vec![Vec::new(); cells];
    for v in 0..n {
        out[cell_of[v]].push(v);
    }
    out
}

struct Search<'a> {
    g: &'a SmallGraph,
    cell_at: Vec<usize>,
    cells: Vec<Vec<usize>>,
    order: Vec<usize>,
    used: u16,
    total_bits: u32,
    best: Option<(u128, Vec<usize>)>,
}

impl Search<'_> {
    fn prefix_bits(k: usize) -> u32 {
        (k * (k + 1) / 2) as u32
    }

    fn dfs(&mut self, k: usize, code: u128) {
        let n = self.g.n;
        if k == n {
            if self.best.as_ref().is_none_or(|(b, _)| code < *b) {
                self.best = Some((code, self.order.clone()));
            }
            return;
        }
        let cell = self.cell_at[k];
        for idx in 0..self.cells[cell].len() {
            let v = self.cells[cell][idx];
            if self.used >> v & 1 == 1 {
                continue;
            }
            let mut next = code;
            for &u in &self.order {
                next = next << 1 | self.g.has_edge(u, v) as u128;
            }
            if let Some((best, _)) = &self.best {
                let shift = self.total_bits - Self::prefix_bits(k);
                let best_prefix = if shift >= 128 { 0 } else { best >> shift };
                if next > best_prefix {
                    continue;
                }
            }
            self.used |= 1 << v;
            self.order.push(v);
            self.dfs(k + 1, next);
            self.order.pop();
            self.used &= !(1 << v);
        }
    }
}

pub fn canonical_form(g: &SmallGraph) -> Canonical {
    let cells = refine(g);
    let mut cell_at = Vec::with_capacity(g.n);
    for (c, cell) in cells.iter().enumerate() {
        cell_at.extend(std::iter::repeat_n(c, cell.len()));
    }
    let total_bits = (g.n * g.n.saturating_sub(1) / 2) as u32;
    let mut search = Search {
        g,
        cell_at,
        cells,
        order: Vec::new(),
        used: 0,
        total_bits,
        best: None,
    };
    search.dfs(0, 0);
    let (code, order) = search.best.expect("at least one labeling");
    Canonical {
        code,
        graph: g.permuted(&order),
    }
}
