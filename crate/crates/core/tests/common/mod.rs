//! Helpers shared by the integration tests.
#![allow(dead_code)]

use finsolv::geometry::{fundamental_matrix, random_camera};
use nalgebra::{DMatrix, Matrix3, Matrix3x4, SMatrix};
use rand::Rng;

/// Central differences of a 10-vector function in the column-major entries
/// of its argument, step `1e-5 · max(1, |x|)`.
pub fn numeric_jacobian<const R: usize, const C: usize>(
    x: &SMatrix<f64, R, C>,
    eval: impl Fn(&SMatrix<f64, R, C>) -> SMatrix<f64, 10, 1>,
) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(10, R * C);
    for k in 0..R * C {
        let h = 1e-5 * x[k].abs().max(1.0);
        let (mut plus, mut minus) = (*x, *x);
        plus[k] += h;
        minus[k] -= h;
        out.set_column(k, &((eval(&plus) - eval(&minus)) / (2.0 * h)));
    }
    out
}

pub fn rel_err(analytic: &DMatrix<f64>, numeric: &DMatrix<f64>) -> f64 {
    (analytic - numeric).norm() / analytic.norm().max(f64::MIN_POSITIVE)
}

/// Random camera pair with distinct centres and its normalized fundamental matrix.
pub fn instance<R: Rng>(rng: &mut R) -> (Matrix3x4<f64>, Matrix3x4<f64>, Matrix3<f64>) {
    loop {
        let pi = random_camera(rng);
        let pj = random_camera(rng);
        if let Ok(f) = fundamental_matrix(&pi, &pj) {
            return (pi.0, pj.0, f.normalized().0);
        }
    }
}

/// Numerical rank with a relative singular-value threshold.
pub fn rank(m: &DMatrix<f64>, tol: f64) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.max();
    sv.iter().filter(|&&s| s > tol * top).count()
}
