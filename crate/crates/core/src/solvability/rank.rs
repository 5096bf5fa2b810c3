//! Numerical full-column-rank test and kernel extraction for the Jacobian.
//!
//! Two routes share one contract:
//!
//! * dense SVD of `J` for systems up to [`DENSE_COLUMN_LIMIT`] columns;
//! * for larger systems, inverse iteration on a Cholesky factorization of
//!   `JᵀJ + δI`. The eigenvector estimate is then scored with `‖J v‖`, which
//!   is an upper bound on `σ_min(J)` and does not suffer from the squared
//!   conditioning of the normal matrix.

use faer::linalg::solvers::{Llt, Solve};
use faer::{Mat, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::jacobian::JacobianSystem;
use crate::error::{Error, Result};

/// Relative singular-value threshold: `σ ≤ τ σ_max` counts as zero.
pub const DEFAULT_TOLERANCE: f64 = 1e-8;

/// Above this many columns the Gram route is used.
pub const DENSE_COLUMN_LIMIT: usize = 3000;

/// Above this many dense entries (`rows × cols`) the Gram route is used.
pub const DENSE_ENTRY_LIMIT: usize = 40_000_000;

const POWER_ITERATIONS: usize = 300;
const INVERSE_ITERATIONS: usize = 400;
const SUBSPACE_ITERATIONS: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RankMethod {
    DenseSvd,
    GramInverseIteration,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankTest {
    pub full_rank: bool,
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// Numerical rank of `J`.
    pub rank: usize,
    pub method: RankMethod,
}

pub fn select_method(j: &JacobianSystem) -> RankMethod {
    if j.cols() <= DENSE_COLUMN_LIMIT && j.rows().max(j.cols()) * j.cols() <= DENSE_ENTRY_LIMIT {
        RankMethod::DenseSvd
    } else {
        RankMethod::GramInverseIteration
    }
}

/// Whether `σ_min(J) > τ σ_max(J)`.
pub fn is_full_column_rank(j: &JacobianSystem, tolerance: f64) -> Result<RankTest> {
    rank_test_with(j, tolerance, select_method(j))
}

pub fn rank_test_with(j: &JacobianSystem, tolerance: f64, method: RankMethod) -> Result<RankTest> {
    match method {
        RankMethod::DenseSvd => dense_rank(j, tolerance),
        RankMethod::GramInverseIteration => gram_rank(j, tolerance),
    }
}

/// Orthonormal basis (`12n × k`) of the numerical kernel of `J`.
pub fn null_space_basis(j: &JacobianSystem, tolerance: f64) -> Result<Mat<f64>> {
    null_space_basis_with(j, tolerance, select_method(j))
}

pub fn null_space_basis_with(
    j: &JacobianSystem,
    tolerance: f64,
    method: RankMethod,
) -> Result<Mat<f64>> {
    match method {
        RankMethod::DenseSvd => dense_null_space(j, tolerance),
        RankMethod::GramInverseIteration => {
            let factor = GramFactor::new(j)?;
            Ok(factor.null_space(j, tolerance))
        }
    }
}

/// Zero-padded to at least as many rows as columns, so the SVD always
/// yields `cols` singular values.
fn padded_dense(j: &JacobianSystem) -> Mat<f64> {
    let rows = j.rows().max(j.cols());
    let mut m = Mat::<f64>::zeros(rows, j.cols());
    for r in 0..j.rows() {
        for (c, v) in j.matrix.row(r) {
            m[(r, c)] = v;
        }
    }
    m
}

fn dense_rank(j: &JacobianSystem, tolerance: f64) -> Result<RankTest> {
    let sv = padded_dense(j)
        .singular_values()
        .map_err(|e| Error::Convergence(format!("{e:?}")))?;
    Ok(summarize(&sv, tolerance, RankMethod::DenseSvd))
}

fn summarize(sv: &[f64], tolerance: f64, method: RankMethod) -> RankTest {
    let sigma_max = sv.first().copied().unwrap_or(0.0);
    let sigma_min = sv.last().copied().unwrap_or(0.0);
    let threshold = tolerance * sigma_max;
    let rank = sv.iter().filter(|&&s| s > threshold).count();
    RankTest {
        full_rank: sigma_max > 0.0 && sigma_min > threshold,
        sigma_min,
        sigma_max,
        rank,
        method,
    }
}

fn dense_null_space(j: &JacobianSystem, tolerance: f64) -> Result<Mat<f64>> {
    let svd = padded_dense(j)
        .thin_svd()
        .map_err(|e| Error::Convergence(format!("{e:?}")))?;
    let s = svd.S().column_vector();
    let sigma_max = s[0];
    let threshold = tolerance * sigma_max;
    let kernel: Vec<usize> = (0..s.nrows())
        .filter(|&k| s[k] <= threshold || s[k].is_nan())
        .collect();
    let v = svd.V();
    Ok(Mat::from_fn(v.nrows(), kernel.len(), |r, c| {
        v[(r, kernel[c])]
    }))
}

fn random_unit(n: usize, seed: u64) -> Mat<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = Mat::from_fn(n, 1, |_, _| rng.random_range(-1.0..1.0));
    let norm = v.norm_l2();
    v /= faer::Scale(norm);
    v
}

fn apply_col(j: &JacobianSystem, v: &Mat<f64>, col: usize) -> Vec<f64> {
    let x: Vec<f64> = (0..v.nrows()).map(|r| v[(r, col)]).collect();
    j.apply(&x)
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Cholesky factor of `JᵀJ + δI` and the spectral scale of `JᵀJ`.
struct GramFactor {
    llt: Llt<f64>,
    lambda_max: f64,
}

impl GramFactor {
    fn new(j: &JacobianSystem) -> Result<Self> {
        let gram = j.gram();
        let lambda_max = power_iteration(&gram);
        if lambda_max <= 0.0 {
            return Err(Error::Convergence("Jacobian is identically zero".into()));
        }
        let mut shift = 1e-11 * lambda_max;
        for _ in 0..6 {
            let mut shifted = gram.clone();
            for k in 0..shifted.nrows() {
                shifted[(k, k)] += shift;
            }
            if let Ok(llt) = shifted.llt(Side::Lower) {
                return Ok(GramFactor { llt, lambda_max });
            }
            shift *= 100.0;
        }
        Err(Error::Convergence(
            "shifted normal matrix is not positive definite".into(),
        ))
    }

    fn sigma_max(&self) -> f64 {
        self.lambda_max.sqrt()
    }

    /// Inverse iteration; returns `‖J v‖` for the converged unit vector.
    fn smallest_singular_value(&self, j: &JacobianSystem, tolerance: f64) -> f64 {
        let mut v = random_unit(j.cols(), 0x5eed);
        let floor = 1e-3 * tolerance * self.sigma_max();
        let mut previous = f64::INFINITY;
        let mut estimate = f64::INFINITY;
        for it in 0..INVERSE_ITERATIONS {
            let mut w = self.llt.solve(&v);
            let n = w.norm_l2();
            w /= faer::Scale(n);
            v = w;
            if it % 4 == 3 {
                estimate = norm(&apply_col(j, &v, 0));
                if estimate <= floor || (previous - estimate).abs() <= 1e-6 * estimate {
                    break;
                }
                previous = estimate;
            }
        }
        estimate
    }

    /// Block inverse iteration with Rayleigh–Ritz scoring on `J`; the block
    /// grows until it holds at least one vector outside the kernel.
    fn null_space(&self, j: &JacobianSystem, tolerance: f64) -> Mat<f64> {
        let n = j.cols();
        let threshold = tolerance * self.sigma_max();
        let mut block = 8.min(n);
        loop {
            let mut rng = ChaCha8Rng::seed_from_u64(0xb10c + block as u64);
            let mut v = Mat::from_fn(n, block, |_, _| rng.random_range(-1.0..1.0));
            v = v.qr().compute_thin_Q();
            for _ in 0..SUBSPACE_ITERATIONS {
                v = self.llt.solve(&v).qr().compute_thin_Q();
            }
            let jv_cols: Vec<Vec<f64>> = (0..block).map(|c| apply_col(j, &v, c)).collect();
            let jv = Mat::from_fn(j.rows(), block, |r, c| jv_cols[c][r]);
            let svd = match jv.thin_svd() {
                Ok(s) => s,
                Err(_) => return Mat::zeros(n, 0),
            };
            let s = svd.S().column_vector();
            let kernel: Vec<usize> = (0..block)
                .filter(|&k| s[k] <= threshold || s[k].is_nan())
                .collect();
            if kernel.len() < block || block == n {
                let ritz = &v * svd.V();
                return Mat::from_fn(n, kernel.len(), |r, c| ritz[(r, kernel[c])]);
            }
            block = (2 * block).min(n);
        }
    }
}

fn power_iteration(gram: &Mat<f64>) -> f64 {
    let mut v = random_unit(gram.nrows(), 0x9a3);
    let mut lambda = 0.0;
    for _ in 0..POWER_ITERATIONS {
        let w = gram * &v;
        let next = (v.transpose() * &w)[(0, 0)];
        let n = w.norm_l2();
        if n == 0.0 {
            return 0.0;
        }
        v = w / faer::Scale(n);
        if (next - lambda).abs() <= 1e-12 * next.abs() {
            return next;
        }
        lambda = next;
    }
    // the Rayleigh quotient approaches λ_max from below; nudge it up
    lambda * (1.0 + 1e-6)
}

fn gram_rank(j: &JacobianSystem, tolerance: f64) -> Result<RankTest> {
    let cols = j.cols();
    let factor = GramFactor::new(j)?;
    let sigma_max = factor.sigma_max();
    let sigma_min = if j.rows() < cols {
        0.0
    } else {
        factor.smallest_singular_value(j, tolerance)
    };
    let full_rank = sigma_min > tolerance * sigma_max;
    let rank = if full_rank {
        cols
    } else {
        cols - factor.null_space(j, tolerance).ncols()
    };
    Ok(RankTest {
        full_rank,
        sigma_min,
        sigma_max,
        rank,
        method: RankMethod::GramInverseIteration,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{fundamental_assignment, random_generic_configuration};
    use crate::graph::ViewingGraph;
    use crate::solvability::jacobian::assemble_jacobian;

    fn jacobian(text: &str, seed: u64) -> JacobianSystem {
        let g = ViewingGraph::parse_edge_list(text).unwrap();
        let c = random_generic_configuration(&g, seed).unwrap();
        let f = fundamental_assignment(&g, &c).unwrap();
        assemble_jacobian(&g, &c, &f, g.edges()[0]).unwrap()
    }

    const TRIANGLE: &str = "0 1\n1 2\n0 2";
    const SQUARE: &str = "0 1\n1 2\n2 3\n3 0";

    #[test]
    fn triangle_is_full_rank() {
        let t = is_full_column_rank(&jacobian(TRIANGLE, 1), DEFAULT_TOLERANCE).unwrap();
        assert!(t.full_rank, "{t:?}");
        assert_eq!(t.rank, 36);
        assert_eq!(
            null_space_basis(&jacobian(TRIANGLE, 1), DEFAULT_TOLERANCE)
                .unwrap()
                .ncols(),
            0
        );
    }

    #[test]
    fn square_is_rank_deficient() {
        let j = jacobian(SQUARE, 1);
        let t = is_full_column_rank(&j, DEFAULT_TOLERANCE).unwrap();
        assert!(!t.full_rank, "{t:?}");
        let kernel = null_space_basis(&j, DEFAULT_TOLERANCE).unwrap();
        assert!(kernel.ncols() >= 1);
        assert_eq!(kernel.ncols(), 48 - t.rank);
    }

    #[test]
    fn duplicated_column_is_detected() {
        let mut j = jacobian(TRIANGLE, 2);
        // copy column 13 onto column 14
        let dense = j.matrix.to_dense_rows();
        let mut rebuilt = j.matrix.clone();
        rebuilt.col_idx.clear();
        rebuilt.values.clear();
        rebuilt.row_ptr = vec![0];
        for mut row in dense {
            row[14] = row[13];
            for (c, v) in row.into_iter().enumerate() {
                if v != 0.0 {
                    rebuilt.col_idx.push(c);
                    rebuilt.values.push(v);
                }
            }
            rebuilt.row_ptr.push(rebuilt.col_idx.len());
        }
        j.matrix = rebuilt;
        for method in [RankMethod::DenseSvd, RankMethod::GramInverseIteration] {
            assert!(
                !rank_test_with(&j, DEFAULT_TOLERANCE, method)
                    .unwrap()
                    .full_rank
            );
        }
    }

    #[test]
    fn both_routes_agree_on_small_systems() {
        for text in [
            TRIANGLE,
            SQUARE,
            "0 1\n0 2\n0 3\n1 2\n1 3",
            "0 1\n1 2\n0 2\n2 3\n3 4\n2 4",
        ] {
            let j = jacobian(text, 7);
            let dense = rank_test_with(&j, DEFAULT_TOLERANCE, RankMethod::DenseSvd).unwrap();
            let gram =
                rank_test_with(&j, DEFAULT_TOLERANCE, RankMethod::GramInverseIteration).unwrap();
            assert_eq!(dense.full_rank, gram.full_rank, "{text}");
            assert_eq!(dense.rank, gram.rank, "{text}");
            assert!((dense.sigma_max - gram.sigma_max).abs() <= 1e-3 * dense.sigma_max);
            if dense.full_rank {
                assert!((dense.sigma_min - gram.sigma_min).abs() <= 1e-3 * dense.sigma_min);
            }
        }
    }

    #[test]
    fn kernel_vectors_are_annihilated() {
        let j = jacobian("0 1\n1 2\n0 2\n2 3\n3 4\n2 4", 3);
        for method in [RankMethod::DenseSvd, RankMethod::GramInverseIteration] {
            let test = rank_test_with(&j, DEFAULT_TOLERANCE, method).unwrap();
            let kernel = null_space_basis_with(&j, DEFAULT_TOLERANCE, method).unwrap();
            assert!(kernel.ncols() > 0);
            for c in 0..kernel.ncols() {
                let col: Vec<f64> = (0..kernel.nrows()).map(|r| kernel[(r, c)]).collect();
                let r = norm(&j.apply(&col));
                assert!(
                    r <= 10.0 * DEFAULT_TOLERANCE * test.sigma_max * norm(&col),
                    "{method:?}: {r:e}"
                );
            }
        }
    }
}
