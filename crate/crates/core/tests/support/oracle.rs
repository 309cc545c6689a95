//! Brute-force linear algebra used only to cross-check the library.
//!
//! Singular values come from a one-sided complex Jacobi iteration and null
//! vectors from signed maximal minors. Neither shares code with the crate's
//! SVD.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type M = DMatrix<Complex64>;

pub struct JacobiSvd {
    /// Singular values in descending order.
    pub sigma: Vec<f64>,
    /// Right singular vectors as columns, same order as `sigma`.
    pub v: M,
}

fn col_dot(a: &M, p: usize, q: usize) -> Complex64 {
    (0..a.nrows()).map(|i| a[(i, p)].conj() * a[(i, q)]).sum()
}

fn col_norm2(a: &M, p: usize) -> f64 {
    (0..a.nrows()).map(|i| a[(i, p)].norm_sqr()).sum()
}

/// Rotates columns `p`, `q` of `m` by the real Jacobi pair `(c, s)` after
/// removing phase `phase` from column `q`.
fn rotate(m: &mut M, p: usize, q: usize, c: f64, s: f64, phase: Complex64) {
    for i in 0..m.nrows() {
        let ap = m[(i, p)];
        let aq = m[(i, q)] * phase.conj();
        m[(i, p)] = ap * c - aq * s;
        m[(i, q)] = ap * s + aq * c;
    }
}

/// One-sided Jacobi SVD of an `m x n` matrix with `m >= n`. Wide inputs are
/// padded with zero rows by the caller.
pub fn jacobi_svd(a: &M) -> JacobiSvd {
    let n = a.ncols();
    assert!(a.nrows() >= n, "pad wide matrices with zero rows first");
    let mut work = a.clone();
    let mut v = M::identity(n, n);
    // Columns below this energy count as exact zeros.
    let negligible = 1e-36 * (0..n).map(|p| col_norm2(&work, p)).sum::<f64>();
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = col_norm2(&work, p);
                let beta = col_norm2(&work, q);
                let gamma = col_dot(&work, p, q);
                let g = gamma.norm();
                if alpha.min(beta) <= negligible || g <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let phase = phase / phase.norm();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut work, p, q, c, s, phase);
                rotate(&mut v, p, q, c, s, phase);
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n).map(|p| col_norm2(&work, p).sqrt()).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    JacobiSvd {
        sigma: order.iter().map(|&p| norms[p]).collect(),
        v: M::from_fn(n, n, |i, k| v[(i, order[k])]),
    }
}

fn pad_rows(a: &M, rows: usize) -> M {
    M::from_fn(rows.max(a.nrows()), a.ncols(), |i, j| {
        if i < a.nrows() {
            a[(i, j)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

pub fn singular_values(a: &M) -> Vec<f64> {
    let s = jacobi_svd(&pad_rows(a, a.ncols())).sigma;
    s.into_iter().take(a.nrows().min(a.ncols())).collect()
}

pub fn rank(a: &M, rel_tol: f64) -> usize {
    let s = singular_values(a);
    let top = s.first().copied().unwrap_or(0.0);
    s.iter().filter(|&&x| x > rel_tol * top).count()
}

/// Orthonormal basis of the right null space, as columns.
pub fn null_space(a: &M, rel_tol: f64) -> M {
    let svd = jacobi_svd(&pad_rows(a, a.ncols()));
    let top = svd.sigma[0];
    let r = svd.sigma.iter().filter(|&&x| x > rel_tol * top).count();
    svd.v.columns(r, a.ncols() - r).into_owned()
}

/// Orthonormal basis of the left null space, as columns.
pub fn left_null_space(a: &M, rel_tol: f64) -> M {
    null_space(&a.adjoint(), rel_tol)
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det(a: &M) -> Complex64 {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let mut m = a.clone();
    let mut d = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[(i, k)].norm().total_cmp(&m[(j, k)].norm())).unwrap();
        if m[(p, k)].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if p != k {
            m.swap_rows(p, k);
            d = -d;
        }
        d *= m[(k, k)];
        for i in (k + 1)..n {
            let f = m[(i, k)] / m[(k, k)];
            for j in k..n {
                let sub = f * m[(k, j)];
                m[(i, j)] -= sub;
            }
        }
    }
    d
}

/// Null vector of a full-rank `(n-1) x n` matrix from signed maximal minors.
pub fn cofactor_null_vector(a: &M) -> Vec<Complex64> {
    let (r, n) = a.shape();
    assert_eq!(r + 1, n);
    (0..n)
        .map(|j| {
            let minor = a.clone().remove_column(j);
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            det(&minor) * sign
        })
        .collect()
}

/// `|<a, b>| / (|a| |b|)`: 1 when the vectors agree up to a complex scale.
pub fn alignment(a: &[Complex64], b: &[Complex64]) -> f64 {
    let dot: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    let na: f64 = a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    dot.norm() / (na * nb)
}

/// Orthogonal projector onto the column span of an orthonormal basis.
pub fn projector(basis: &M) -> M {
    basis * basis.adjoint()
}

/// Frobenius norm of a matrix.
pub fn fro(a: &M) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Deterministic complex Gaussian-like matrix from a simple LCG, so the
/// oracle does not depend on the crate's samplers.
pub fn lcg_matrix(rows: usize, cols: usize, seed: u64) -> M {
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut uniform = move || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((state >> 11) as f64 + 0.5) / (1u64 << 53) as f64
    };
    M::from_fn(rows, cols, |_, _| {
        let (u1, u2) = (uniform(), uniform());
        let r = (-u1.ln()).sqrt();
        Complex64::from_polar(r, 2.0 * std::f64::consts::PI * u2)
    })
}

/// Random `rows x cols` matrix of exact rank `r`.
pub fn lcg_rank_matrix(rows: usize, cols: usize, r: usize, seed: u64) -> M {
    lcg_matrix(rows, r, seed) * lcg_matrix(r, cols, seed ^ 0x9e37_79b9_7f4a_7c15)
}
