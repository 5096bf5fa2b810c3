//! Assembly of the augmented Jacobian: one 10-row block per edge, then the
//! gauge rows fixing the projective frame, then one scale row per camera.

use std::io::Write;

use nalgebra::{Matrix3, Matrix3x4, SMatrix};
use serde::Serialize;

use crate::calculus::{dphi_dpi_with, dphi_dpj_with, symmetrizer};
use crate::error::{Error, Result};
use crate::geometry::{CameraConfiguration, FundamentalAssignment, COINCIDENT_CENTER_TOL};
use crate::graph::{Edge, ViewingGraph};
use crate::ring::Ring;

/// Origin of a group of Jacobian rows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RowBlockKind {
    /// The ten constraint rows of one edge.
    EdgeConstraint { edge: usize },
    /// Twelve rows pinning every entry of the first gauge camera.
    GaugeCamera { node: usize },
    /// Four rows pinning the first row of the second gauge camera.
    GaugeRow { node: usize },
    /// The sum-of-entries chart of one camera.
    Scale { node: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RowBlock {
    #[serde(flatten)]
    pub kind: RowBlockKind,
    pub start: usize,
    pub len: usize,
}

/// Sparse matrix in compressed-row form together with its row-block layout.
#[derive(Clone, Debug)]
pub struct SparseRows<T> {
    pub cols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<T>,
    pub blocks: Vec<RowBlock>,
}

impl<T: Ring> SparseRows<T> {
    fn new(cols: usize) -> Self {
        SparseRows {
            cols,
            row_ptr: vec![0],
            col_idx: Vec::new(),
            values: Vec::new(),
            blocks: Vec::new(),
        }
    }

    pub fn rows(&self) -> usize {
        self.row_ptr.len() - 1
    }

    fn push_row(&mut self, entries: impl IntoIterator<Item = (usize, T)>) {
        for (c, v) in entries {
            if v != T::zero() {
                self.col_idx.push(c);
                self.values.push(v);
            }
        }
        self.row_ptr.push(self.col_idx.len());
    }

    fn open_block(&mut self, kind: RowBlockKind) -> usize {
        let start = self.rows();
        self.blocks.push(RowBlock {
            kind,
            start,
            len: 0,
        });
        start
    }

    fn close_block(&mut self, start: usize) {
        let len = self.rows() - start;
        self.blocks.last_mut().expect("open block").len = len;
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn to_dense_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows())
            .map(|r| {
                let mut row = vec![T::zero(); self.cols];
                for (c, v) in self.row(r) {
                    row[c] = v;
                }
                row
            })
            .collect()
    }
}

/// Builds the augmented Jacobian over any ring. `gauge = (a, b)` pins all of
/// camera `a` and the first row of camera `b`; every node but `a` gets a
/// scale row.
pub fn assemble_generic<T: Ring>(
    g: &ViewingGraph,
    cameras: &[Matrix3x4<T>],
    fmats: &[Matrix3<T>],
    gauge: Edge,
) -> SparseRows<T> {
    let n = g.node_count();
    let sym: SMatrix<T, 10, 16> = symmetrizer();
    let mut j = SparseRows::new(12 * n);

    for (e, &(a, b)) in g.edges().iter().enumerate() {
        let f = &fmats[e];
        let block_i = dphi_dpi_with(&sym, &cameras[b], f);
        let block_j = dphi_dpj_with(&sym, &cameras[a], f);
        let start = j.open_block(RowBlockKind::EdgeConstraint { edge: e });
        for r in 0..10 {
            let left = (0..12).map(|c| (12 * a + c, block_i[(r, c)]));
            let right = (0..12).map(|c| (12 * b + c, block_j[(r, c)]));
            j.push_row(left.chain(right));
        }
        j.close_block(start);
    }

    let (ga, gb) = gauge;
    let start = j.open_block(RowBlockKind::GaugeCamera { node: ga });
    for k in 0..12 {
        j.push_row([(12 * ga + k, T::one())]);
    }
    j.close_block(start);

    // first row of a 3 × 4 camera sits at vec positions 0, 3, 6, 9
    let start = j.open_block(RowBlockKind::GaugeRow { node: gb });
    for c in 0..4 {
        j.push_row([(12 * gb + 3 * c, T::one())]);
    }
    j.close_block(start);

    for node in (0..n).filter(|&v| v != ga) {
        let start = j.open_block(RowBlockKind::Scale { node });
        j.push_row((0..12).map(|k| (12 * node + k, T::one())));
        j.close_block(start);
    }
    j
}

/// Floating-point augmented Jacobian with provenance.
#[derive(Clone, Debug)]
pub struct JacobianSystem {
    pub matrix: SparseRows<f64>,
    pub gauge_edge: Edge,
    pub config_seed: u64,
}

/// Number of non-edge rows: 12 + 4 gauge rows plus `n − 1` scale rows.
pub fn auxiliary_rows(n: usize) -> usize {
    n + 15
}

impl JacobianSystem {
    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.cols
    }

    pub fn blocks(&self) -> &[RowBlock] {
        &self.matrix.blocks
    }

    pub fn nnz(&self) -> usize {
        self.matrix.values.len()
    }

    /// `J x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows())
            .map(|r| self.matrix.row(r).map(|(c, v)| v * x[c]).sum())
            .collect()
    }

    pub fn to_dense(&self) -> faer::Mat<f64> {
        let mut m = faer::Mat::<f64>::zeros(self.rows(), self.cols());
        for r in 0..self.rows() {
            for (c, v) in self.matrix.row(r) {
                m[(r, c)] = v;
            }
        }
        m
    }

    /// Dense `JᵀJ`, accumulated row by row.
    pub fn gram(&self) -> faer::Mat<f64> {
        let n = self.cols();
        let mut g = faer::Mat::<f64>::zeros(n, n);
        for r in 0..self.rows() {
            let range = self.matrix.row_ptr[r]..self.matrix.row_ptr[r + 1];
            let cols = &self.matrix.col_idx[range.clone()];
            let vals = &self.matrix.values[range];
            for (p, &cp) in cols.iter().enumerate() {
                for (q, &cq) in cols.iter().enumerate() {
                    g[(cp, cq)] += vals[p] * vals[q];
                }
            }
        }
        g
    }

    /// Matrix Market coordinate export (1-based indices).
    pub fn write_matrix_market<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(
            w,
            "% gauge edge ({}, {}), configuration seed {}",
            self.gauge_edge.0, self.gauge_edge.1, self.config_seed
        )?;
        writeln!(w, "{} {} {}", self.rows(), self.cols(), self.nnz())?;
        for r in 0..self.rows() {
            for (c, v) in self.matrix.row(r) {
                writeln!(w, "{} {} {:e}", r + 1, c + 1, v)?;
            }
        }
        Ok(())
    }
}

/// Assembles `J` for a configuration and its fundamental matrices.
pub fn assemble_jacobian(
    g: &ViewingGraph,
    config: &CameraConfiguration,
    fmats: &FundamentalAssignment,
    gauge_edge: Edge,
) -> Result<JacobianSystem> {
    let gauge = if g.contains_edge(gauge_edge.0, gauge_edge.1) {
        gauge_edge
    } else {
        return Err(Error::GaugeEdgeNotInGraph(gauge_edge.0, gauge_edge.1));
    };
    for (e, &(a, b)) in g.edges().iter().enumerate() {
        let f = fmats.matrices[e].matrix();
        let scale = config.cameras[a].matrix().norm() * config.cameras[b].matrix().norm();
        if f.norm() <= COINCIDENT_CENTER_TOL * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::CoincidentCenters);
        }
    }
    let cameras: Vec<Matrix3x4<f64>> = config.cameras.iter().map(|c| *c.matrix()).collect();
    let fs: Vec<Matrix3<f64>> = fmats.matrices.iter().map(|f| *f.matrix()).collect();
    Ok(JacobianSystem {
        matrix: assemble_generic(g, &cameras, &fs, gauge),
        gauge_edge: gauge,
        config_seed: config.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{fundamental_assignment, random_generic_configuration};

    fn build(text: &str, seed: u64) -> (ViewingGraph, JacobianSystem) {
        let g = ViewingGraph::parse_edge_list(text).unwrap();
        let c = random_generic_configuration(&g, seed).unwrap();
        let f = fundamental_assignment(&g, &c).unwrap();
        let j = assemble_jacobian(&g, &c, &f, g.edges()[0]).unwrap();
        (g, j)
    }

    #[test]
    fn dimensions_of_small_systems() {
        assert_eq!(build("0 1\n1 2\n0 2", 1).1.matrix.to_dense_rows().len(), 48);
        let (_, tri) = build("0 1\n1 2\n0 2", 1);
        assert_eq!((tri.rows(), tri.cols()), (48, 36));
        let (_, sq) = build("0 1\n1 2\n2 3\n3 0", 1);
        assert_eq!((sq.rows(), sq.cols()), (59, 48));
        let (_, single) = build("0 1", 1);
        assert_eq!((single.rows(), single.cols()), (27, 24));
    }

    #[test]
    fn edge_blocks_touch_only_their_endpoints() {
        let (g, j) = build("0 1\n1 2\n2 3\n3 0\n0 2", 4);
        for block in j.blocks() {
            if let RowBlockKind::EdgeConstraint { edge } = block.kind {
                let (a, b) = g.edges()[edge];
                assert_eq!(block.len, 10);
                for r in block.start..block.start + block.len {
                    for (c, _) in j.matrix.row(r) {
                        assert!(c / 12 == a || c / 12 == b);
                    }
                }
            }
        }
    }

    #[test]
    fn auxiliary_rows_are_zero_one() {
        let (g, j) = build("0 1\n1 2\n0 2\n2 3\n1 3", 2);
        let edge_rows = 10 * g.edge_count();
        assert_eq!(j.rows() - edge_rows, auxiliary_rows(g.node_count()));
        for r in edge_rows..j.rows() {
            assert!(j.matrix.row(r).all(|(_, v)| v == 1.0));
        }
    }

    #[test]
    fn rejects_foreign_gauge_edge() {
        let g = ViewingGraph::parse_edge_list("0 1\n1 2\n2 3\n3 0").unwrap();
        let c = random_generic_configuration(&g, 1).unwrap();
        let f = fundamental_assignment(&g, &c).unwrap();
        assert!(matches!(
            assemble_jacobian(&g, &c, &f, (0, 2)),
            Err(Error::GaugeEdgeNotInGraph(0, 2))
        ));
    }

    #[test]
    fn gram_matches_dense_product() {
        let (_, j) = build("0 1\n1 2\n0 2\n2 3\n1 3", 6);
        let d = j.to_dense();
        let expected = d.transpose() * &d;
        let g = j.gram();
        let diff = (&expected - &g).norm_max();
        assert!(diff < 1e-12, "{diff}");
    }

    #[test]
    fn matrix_market_header() {
        let (_, j) = build("0 1", 1);
        let mut buf = Vec::new();
        j.write_matrix_market(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next(),
            Some("%%MatrixMarket matrix coordinate real general")
        );
        lines.next();
        assert_eq!(lines.next(), Some(format!("27 24 {}", j.nnz()).as_str()));
        assert_eq!(text.lines().count(), 3 + j.nnz());
    }
}
