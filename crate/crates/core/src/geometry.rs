//! Projective cameras, the fundamental-matrix map and random generic
//! configurations.

use nalgebra::{Matrix3, Matrix3x4, Matrix4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::calculus::phi_residual;
use crate::error::{Error, Result};
use crate::graph::ViewingGraph;
use crate::ring::Ring;

/// Relative threshold below which a fundamental matrix counts as zero.
pub const COINCIDENT_CENTER_TOL: f64 = 1e-12;

/// Smallest admissible `σ₃ / σ₁` for a drawn camera.
pub const CAMERA_RANK_TOL: f64 = 1e-6;

/// Number of re-draws before giving up on a generic configuration.
pub const GENERICITY_RETRIES: usize = 16;

/// Relative bound on `‖Φ‖` for a camera pair and its own fundamental matrix.
pub const PHI_VANISHING_TOL: f64 = 1e-9;

/// 3 × 4 projective camera, defined up to nonzero scale.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Camera(pub Matrix3x4<f64>);

impl Camera {
    pub fn matrix(&self) -> &Matrix3x4<f64> {
        &self.0
    }

    /// Row-major entries.
    pub fn to_row_major(&self) -> [f64; 12] {
        let mut out = [0.0; 12];
        for r in 0..3 {
            for c in 0..4 {
                out[4 * r + c] = self.0[(r, c)];
            }
        }
        out
    }

    pub fn from_row_major(entries: &[f64; 12]) -> Self {
        Camera(Matrix3x4::from_row_slice(entries))
    }

    pub fn is_full_rank(&self) -> bool {
        let sv = self.0.singular_values();
        let max = sv.max();
        max > 0.0 && sv.min() > CAMERA_RANK_TOL * max && sv.iter().all(|v| v.is_finite())
    }

    /// Camera centre: the right null vector, from the signed 3 × 3 minors.
    pub fn center(&self) -> nalgebra::Vector4<f64> {
        let m = &self.0;
        let minor = |skip: usize| {
            let cols: Vec<usize> = (0..4).filter(|&c| c != skip).collect();
            Matrix3::from_fn(|r, c| m[(r, cols[c])]).determinant()
        };
        nalgebra::Vector4::new(minor(0), -minor(1), minor(2), -minor(3))
    }

    pub fn transformed(&self, h: &Matrix4<f64>) -> Camera {
        Camera(self.0 * h)
    }
}

impl Serialize for Camera {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_row_major().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Camera {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let entries = <[f64; 12]>::deserialize(d)?;
        Ok(Camera::from_row_major(&entries))
    }
}

/// One camera per node plus the seed that produced them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CameraConfiguration {
    pub cameras: Vec<Camera>,
    pub seed: u64,
}

/// Rank-2 3 × 3 matrix, defined up to nonzero scale.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FundamentalMatrix(pub Matrix3<f64>);

impl FundamentalMatrix {
    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    /// Unit Frobenius norm, with the first (row-major) nonzero entry positive.
    pub fn normalized(&self) -> FundamentalMatrix {
        let norm = self.0.norm();
        if norm == 0.0 {
            return *self;
        }
        let mut m = self.0 / norm;
        let pivot = (0..3)
            .flat_map(|r| (0..3).map(move |c| (r, c)))
            .map(|(r, c)| m[(r, c)])
            .find(|v| v.abs() > 1e-12);
        if pivot.is_some_and(|v| v < 0.0) {
            m = -m;
        }
        FundamentalMatrix(m)
    }

    /// Smallest and middle singular values relative to the largest.
    pub fn singular_ratios(&self) -> (f64, f64) {
        let mut sv: Vec<f64> = self.0.singular_values().iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        (sv[2] / sv[0], sv[1] / sv[0])
    }
}

impl Serialize for FundamentalMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<f64> = (0..3)
            .flat_map(|r| (0..3).map(move |c| (r, c)))
            .map(|rc| self.0[rc])
            .collect();
        rows.serialize(s)
    }
}

/// Fundamental matrices for every edge, in graph edge order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FundamentalAssignment {
    pub matrices: Vec<FundamentalMatrix>,
}

fn det4<T: Ring>(m: &Matrix4<T>) -> T {
    // Laplace expansion along the first row.
    let mut acc = T::zero();
    for c in 0..4 {
        let cols: [usize; 3] = match c {
            0 => [1, 2, 3],
            1 => [0, 2, 3],
            2 => [0, 1, 3],
            _ => [0, 1, 2],
        };
        let d3 = |r0: usize, r1: usize, r2: usize| {
            let a = |r: usize, k: usize| m[(r, cols[k])];
            a(r0, 0) * (a(r1, 1) * a(r2, 2) - a(r1, 2) * a(r2, 1))
                - a(r0, 1) * (a(r1, 0) * a(r2, 2) - a(r1, 2) * a(r2, 0))
                + a(r0, 2) * (a(r1, 0) * a(r2, 1) - a(r1, 1) * a(r2, 0))
        };
        let term = m[(0, c)] * d3(1, 2, 3);
        if c % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

/// Entrywise fundamental matrix: `[F]_{h,k} = (−1)^{h+k} det [P_i without row k; P_j without row h]`.
pub fn fundamental_matrix_raw<T: Ring>(pi: &Matrix3x4<T>, pj: &Matrix3x4<T>) -> Matrix3<T> {
    let mut f = Matrix3::zeros();
    for h in 0..3 {
        for k in 0..3 {
            let ri: Vec<usize> = (0..3).filter(|&r| r != k).collect();
            let rj: Vec<usize> = (0..3).filter(|&r| r != h).collect();
            let stacked = Matrix4::from_fn(|r, c| {
                if r < 2 {
                    pi[(ri[r], c)]
                } else {
                    pj[(rj[r - 2], c)]
                }
            });
            let d = det4(&stacked);
            f[(h, k)] = if (h + k) % 2 == 0 { d } else { -d };
        }
    }
    f
}

/// Fundamental matrix of a camera pair: `(P_j X)ᵀ F (P_i X) = 0` for every
/// world point `X`. Fails when the centres coincide.
pub fn fundamental_matrix(pi: &Camera, pj: &Camera) -> Result<FundamentalMatrix> {
    let f = fundamental_matrix_raw(&pi.0, &pj.0);
    if f.norm() <= COINCIDENT_CENTER_TOL * pi.0.norm() * pj.0.norm() {
        return Err(Error::CoincidentCenters);
    }
    Ok(FundamentalMatrix(f))
}

/// `vech(P_jᵀ F P_i + P_iᵀ Fᵀ P_j)`.
pub fn phi(pi: &Camera, pj: &Camera, f: &FundamentalMatrix) -> [f64; 10] {
    let r = phi_residual(&pi.0, &pj.0, &f.0);
    let mut out = [0.0; 10];
    out.copy_from_slice(r.as_slice());
    out
}

/// Relative size of `Φ(P_i, P_j, F)`, scaled by `‖P_i‖ ‖P_j‖ ‖F‖`.
pub fn phi_relative_norm(pi: &Camera, pj: &Camera, f: &FundamentalMatrix) -> f64 {
    let r = phi_residual(&pi.0, &pj.0, &f.0);
    let scale = pi.0.norm() * pj.0.norm() * f.0.norm();
    if scale == 0.0 {
        0.0
    } else {
        r.norm() / scale
    }
}

/// Draws one camera with i.i.d. uniform entries on [−1, 1], normalized to
/// unit Frobenius norm.
pub fn random_camera<R: Rng>(rng: &mut R) -> Camera {
    let m = Matrix3x4::from_fn(|_, _| rng.random_range(-1.0..=1.0));
    let norm = m.norm();
    Camera(if norm > 0.0 { m / norm } else { m })
}

/// Random cameras for every node of `g`, re-drawn until every camera has
/// full rank and every edge has distinct centres.
pub fn random_generic_configuration(g: &ViewingGraph, seed: u64) -> Result<CameraConfiguration> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..GENERICITY_RETRIES {
        let cameras: Vec<Camera> = (0..g.node_count())
            .map(|_| random_camera(&mut rng))
            .collect();
        if !cameras.iter().all(Camera::is_full_rank) {
            continue;
        }
        let generic = g
            .edges()
            .iter()
            .all(|&(i, j)| fundamental_matrix(&cameras[i], &cameras[j]).is_ok());
        if generic {
            return Ok(CameraConfiguration { cameras, seed });
        }
    }
    Err(Error::DegenerateConfiguration {
        retries: GENERICITY_RETRIES,
    })
}

/// Evaluates the fundamental-matrix map on every edge (normalized), checking
/// that each one satisfies the skew-symmetry constraint with its cameras.
pub fn fundamental_assignment(
    g: &ViewingGraph,
    config: &CameraConfiguration,
) -> Result<FundamentalAssignment> {
    let mut matrices = Vec::with_capacity(g.edge_count());
    for (e, &(i, j)) in g.edges().iter().enumerate() {
        let (pi, pj) = (&config.cameras[i], &config.cameras[j]);
        let f = fundamental_matrix(pi, pj)?.normalized();
        let residual = phi_relative_norm(pi, pj, &f);
        if residual > PHI_VANISHING_TOL {
            return Err(Error::ConstraintViolated { edge: e, residual });
        }
        matrices.push(f);
    }
    Ok(FundamentalAssignment { matrices })
}
