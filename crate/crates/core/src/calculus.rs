//! Vectorization operators, commutation/elimination/duplication matrices and
//! the closed-form derivatives of the skew-symmetry constraint.
//!
//! Conventions: `vec` stacks columns; `vech` takes the lower triangle column
//! by column, i.e. `(1,1),(2,1),(3,1),(4,1),(2,2),…`. Derivatives are
//! arranged as `∂ vec f / ∂ (vec X)ᵀ`, so a camera block is 10 × 12.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, Matrix3, Matrix3x4, Matrix4, Matrix4x3, SMatrix};

use crate::error::{Error, Result};
use crate::ring::Ring;

pub type Block10x12<T> = SMatrix<T, 10, 12>;
pub type Block10x9<T> = SMatrix<T, 10, 9>;

/// Column-major stacking.
pub fn vec<T: Ring>(m: &DMatrix<T>) -> DVector<T> {
    DVector::from_iterator(m.len(), m.iter().copied())
}

/// Lower-triangular half-vectorization without the symmetry check.
pub fn vech_unchecked<T: Ring>(m: &DMatrix<T>) -> DVector<T> {
    let q = m.nrows();
    let mut out = Vec::with_capacity(q * (q + 1) / 2);
    for j in 0..q {
        for i in j..q {
            out.push(m[(i, j)]);
        }
    }
    DVector::from_vec(out)
}

/// Half-vectorization of a symmetric matrix. Fails if `m` deviates from
/// symmetry by more than `tol` times its largest entry.
pub fn vech(m: &DMatrix<f64>, tol: f64) -> Result<DVector<f64>> {
    assert!(m.is_square(), "vech needs a square matrix");
    let scale = m.amax().max(f64::MIN_POSITIVE);
    let deviation = (m - m.transpose()).amax();
    if deviation > tol * scale {
        return Err(Error::Asymmetric { deviation });
    }
    Ok(vech_unchecked(m))
}

/// Commutation matrix `K_{s,t}`: `vec(C) = K_{s,t} vec(Cᵀ)` for `C` of size `s × t`.
pub fn commutation<T: Ring>(s: usize, t: usize) -> DMatrix<T> {
    let mut k = DMatrix::zeros(s * t, s * t);
    for i in 0..s {
        for j in 0..t {
            k[(i + s * j, j + t * i)] = T::one();
        }
    }
    k
}

/// Elimination matrix `L_q` with `vech(X) = L_q vec(X)`.
pub fn elimination<T: Ring>(q: usize) -> DMatrix<T> {
    let mut l = DMatrix::zeros(q * (q + 1) / 2, q * q);
    let mut row = 0;
    for j in 0..q {
        for i in j..q {
            l[(row, i + q * j)] = T::one();
            row += 1;
        }
    }
    l
}

/// Duplication matrix `D_q` with `vec(X) = D_q vech(X)` for symmetric `X`.
pub fn duplication<T: Ring>(q: usize) -> DMatrix<T> {
    let mut d = DMatrix::zeros(q * q, q * (q + 1) / 2);
    for j in 0..q {
        for i in 0..q {
            let (r, c) = if i >= j { (i, j) } else { (j, i) };
            d[(i + q * j, vech_index(q, r, c))] = T::one();
        }
    }
    d
}

/// Position of entry `(i, j)`, `i ≥ j`, inside `vech` of a `q × q` matrix.
pub fn vech_index(q: usize, i: usize, j: usize) -> usize {
    debug_assert!(i >= j);
    j * q + i - j * (j + 1) / 2
}

/// `L₄ (K₄,₄ + I₁₆)`, the 10 × 16 prefix shared by every block.
pub fn symmetrizer<T: Ring>() -> SMatrix<T, 10, 16> {
    let sum = commutation::<T>(4, 4) + DMatrix::<T>::identity(16, 16);
    let prod = elimination::<T>(4) * sum;
    SMatrix::<T, 10, 16>::from_iterator(prod.iter().copied())
}

fn symmetrizer_f64() -> &'static SMatrix<f64, 10, 16> {
    static CACHE: OnceLock<SMatrix<f64, 10, 16>> = OnceLock::new();
    CACHE.get_or_init(symmetrizer::<f64>)
}

fn kron_identity4<T: Ring>(x: &Matrix4x3<T>) -> SMatrix<T, 16, 12> {
    Matrix4::<T>::identity().kronecker(x)
}

/// `vech(S + Sᵀ)` with `S = P_jᵀ F P_i`. Vanishes exactly when `F` is the
/// fundamental matrix of the pair.
pub fn phi_residual<T: Ring>(
    pi: &Matrix3x4<T>,
    pj: &Matrix3x4<T>,
    f: &Matrix3<T>,
) -> SMatrix<T, 10, 1> {
    let s = pj.transpose() * f * pi;
    let sym = s + s.transpose();
    let mut out = SMatrix::<T, 10, 1>::zeros();
    let mut row = 0;
    for j in 0..4 {
        for i in j..4 {
            out[row] = sym[(i, j)];
            row += 1;
        }
    }
    out
}

/// `∂Φ/∂(vec P_j)ᵀ = L₄ (K₄,₄ + I₁₆)(I₄ ⊗ (F P_i)ᵀ)`.
pub fn dphi_dpj_with<T: Ring>(
    sym: &SMatrix<T, 10, 16>,
    pi: &Matrix3x4<T>,
    f: &Matrix3<T>,
) -> Block10x12<T> {
    let x: Matrix4x3<T> = (f * pi).transpose();
    sym * kron_identity4(&x)
}

/// `∂Φ/∂(vec P_i)ᵀ = L₄ (K₄,₄ + I₁₆)(I₄ ⊗ P_jᵀ F)`.
pub fn dphi_dpi_with<T: Ring>(
    sym: &SMatrix<T, 10, 16>,
    pj: &Matrix3x4<T>,
    f: &Matrix3<T>,
) -> Block10x12<T> {
    let x: Matrix4x3<T> = pj.transpose() * f;
    sym * kron_identity4(&x)
}

pub fn dphi_dpj(pi: &Matrix3x4<f64>, f: &Matrix3<f64>) -> Block10x12<f64> {
    dphi_dpj_with(symmetrizer_f64(), pi, f)
}

pub fn dphi_dpi(pj: &Matrix3x4<f64>, f: &Matrix3<f64>) -> Block10x12<f64> {
    dphi_dpi_with(symmetrizer_f64(), pj, f)
}

/// `∂Φ/∂(vec F)ᵀ = L₄ (K₄,₄ + I₁₆)(P_iᵀ ⊗ P_jᵀ)`.
pub fn dphi_df(pi: &Matrix3x4<f64>, pj: &Matrix3x4<f64>) -> Block10x9<f64> {
    symmetrizer_f64() * pi.transpose().kronecker(&pj.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;

    macro_rules! assert_close {
        ($a:expr, $b:expr, $tol:expr) => {{
            let (a, b) = (&$a, &$b);
            let d = (a - b).amax();
            assert!(d <= $tol, "max deviation {d:e} > {:e}", $tol);
        }};
    }

    fn sample(r: usize, c: usize, seed: u64) -> DMatrix<f64> {
        // small deterministic generator, independent from the crate's RNG use
        let mut state = seed
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        DMatrix::from_fn(r, c, |_, _| {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        })
    }

    #[test]
    fn vec_stacks_columns() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(vec(&m).as_slice(), &[1.0, 3.0, 2.0, 4.0]);
        assert_eq!(
            vec(&DMatrix::<f64>::identity(2, 2)).as_slice(),
            &[1.0, 0.0, 0.0, 1.0]
        );
    }

    #[test]
    fn vectorization_trick() {
        let a = sample(3, 4, 1);
        let x = sample(4, 2, 2);
        let b = sample(2, 5, 3);
        let lhs = vec(&(&a * &x * &b));
        let rhs = b.transpose().kronecker(&a) * vec(&x);
        assert_close!(lhs, rhs, 1e-12);
    }

    #[test]
    fn vech_small_cases() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 3.0]);
        assert_eq!(vech(&m, 1e-12).unwrap().as_slice(), &[1.0, 2.0, 3.0]);
        let s = sample(4, 4, 5);
        let sym = &s + s.transpose();
        assert_eq!(vech(&sym, 1e-12).unwrap().len(), 10);
        assert!(matches!(vech(&s, 1e-12), Err(Error::Asymmetric { .. })));
    }

    #[test]
    fn elimination_extracts_vech() {
        let s = sample(4, 4, 7);
        let sym = &s + s.transpose();
        assert_close!(
            elimination::<f64>(4) * vec(&sym),
            vech(&sym, 1e-12).unwrap(),
            0.0
        );
    }

    #[test]
    fn elimination_times_duplication_is_identity() {
        for q in 1..6 {
            let p = elimination::<f64>(q) * duplication::<f64>(q);
            assert_eq!(p, DMatrix::identity(q * (q + 1) / 2, q * (q + 1) / 2));
        }
    }

    #[test]
    fn vech_index_matches_ordering() {
        for q in 1..6 {
            let mut k = 0;
            for j in 0..q {
                for i in j..q {
                    assert_eq!(vech_index(q, i, j), k);
                    k += 1;
                }
            }
        }
    }

    #[test]
    fn commutation_identities() {
        assert_eq!(commutation::<f64>(1, 1), DMatrix::from_element(1, 1, 1.0));

        let c = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(commutation::<f64>(2, 2) * vec(&c.transpose()), vec(&c));

        for (s, t) in [(2, 3), (3, 2), (4, 4), (1, 5)] {
            let c = sample(s, t, (s * 10 + t) as u64);
            let k = commutation::<f64>(s, t);
            assert_eq!(&k * vec(&c.transpose()), vec(&c));
            assert_eq!(&k * k.transpose(), DMatrix::identity(s * t, s * t));
            assert_eq!(k, commutation::<f64>(t, s).transpose());
        }
    }

    #[test]
    fn kronecker_swap_identity() {
        // B ⊗ A = K_{r,t} (A ⊗ B) K_{q,s} for A r×s, B t×q
        let (r, s, t, q) = (2, 3, 4, 2);
        let a = sample(r, s, 11);
        let b = sample(t, q, 12);
        let rhs = commutation::<f64>(r, t) * a.kronecker(&b) * commutation::<f64>(q, s);
        assert_close!(b.kronecker(&a), rhs, 0.0);
    }

    #[test]
    fn symmetrizer_maps_vec_s_to_vec_sym() {
        let s = sample(4, 4, 21);
        let lhs = (commutation::<f64>(4, 4) + DMatrix::identity(16, 16)) * vec(&s);
        assert_close!(lhs, vec(&(&s + s.transpose())), 0.0);
    }

    #[test]
    fn blocks_vanish_for_zero_f() {
        let p = Matrix3x4::from_iterator(sample(3, 4, 9).iter().copied());
        let z = Matrix3::zeros();
        assert_eq!(dphi_dpi(&p, &z), Block10x12::zeros());
        assert_eq!(dphi_dpj(&p, &z), Block10x12::zeros());
    }
}
