//! Exact rank of the augmented Jacobian over GF(p).
//!
//! The constraint blocks are polynomial in the camera entries, so the same
//! assembly code runs over a prime field. Random cameras over a large field
//! are generic with high probability, and the resulting rank is exact: it
//! cross-checks the floating-point threshold decision.

use nalgebra::{Matrix3, Matrix3x4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::jacobian::assemble_generic;
use crate::error::{Error, Result};
use crate::geometry::{fundamental_matrix_raw, GENERICITY_RETRIES};
use crate::graph::ViewingGraph;
use crate::ring::Fp;

/// 2³¹ − 1.
pub const DEFAULT_PRIME: u64 = 2_147_483_647;

/// Deterministic Miller–Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mul = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let pow = |mut b: u64, mut e: u64| {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = mul(acc, b);
            }
            b = mul(b, b);
            e >>= 1;
        }
        acc
    };
    let (mut d, mut s) = (n - 1, 0);
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn camera_has_full_rank(p: &Matrix3x4<Fp>) -> bool {
    // rank 3 iff some 3 × 3 minor is nonzero
    (0..4).any(|skip| {
        let cols: Vec<usize> = (0..4).filter(|&c| c != skip).collect();
        let m = Matrix3::from_fn(|r, c| p[(r, cols[c])]);
        let det = m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
            - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
            + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)]);
        !det.is_zero_mod()
    })
}

/// Rank over GF(`prime`) of the augmented Jacobian at random field cameras.
pub fn finite_field_rank(g: &ViewingGraph, prime: u64, seed: u64) -> Result<usize> {
    if prime <= 1 << 20 || prime >= 1 << 62 || !is_prime(prime) {
        return Err(Error::OutOfRange(format!(
            "{prime} is not a prime in (2^20, 2^62)"
        )));
    }
    let gauge = *g.edges().first().ok_or(Error::NoEdges)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..GENERICITY_RETRIES {
        let cameras: Vec<Matrix3x4<Fp>> = (0..g.node_count())
            .map(|_| Matrix3x4::from_fn(|_, _| Fp::new(rng.random_range(0..prime), prime)))
            .collect();
        if !cameras.iter().all(camera_has_full_rank) {
            continue;
        }
        let fmats: Vec<Matrix3<Fp>> = g
            .edges()
            .iter()
            .map(|&(a, b)| fundamental_matrix_raw(&cameras[a], &cameras[b]))
            .collect();
        if fmats.iter().any(|f| f.iter().all(Fp::is_zero_mod)) {
            continue;
        }
        let j = assemble_generic(g, &cameras, &fmats, gauge);
        let rows: Vec<Vec<u64>> = j
            .to_dense_rows()
            .into_iter()
            .map(|row| row.into_iter().map(|x| x.bind(prime).value()).collect())
            .collect();
        return Ok(rank_mod_p(rows, j.cols, prime));
    }
    Err(Error::DegenerateConfiguration {
        retries: GENERICITY_RETRIES,
    })
}

/// Row reduction over GF(p).
pub fn rank_mod_p(mut rows: Vec<Vec<u64>>, cols: usize, p: u64) -> usize {
    let mul = |a: u64, b: u64| ((a as u128 * b as u128) % p as u128) as u64;
    let inv = |a: u64| Fp::new(a, p).inverse().expect("nonzero pivot").value();
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let scale = inv(rows[rank][col]);
        for x in &mut rows[rank][col..] {
            *x = mul(*x, scale);
        }
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == rank || row[col] == 0 {
                continue;
            }
            let factor = row[col];
            for c in col..cols {
                if pivot_row[c] != 0 {
                    row[c] = (row[c] + p - mul(factor, pivot_row[c])) % p;
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// Finite solvability over GF(p): the augmented Jacobian has full column rank.
pub fn finite_field_verdict(g: &ViewingGraph, prime: u64, seed: u64) -> Result<bool> {
    Ok(finite_field_rank(g, prime, seed)? == 12 * g.node_count())
}
