//! Complex dense linear algebra used by every scheme.
//!
//! All routines are thin contracts over nalgebra's SVD and LU factorizations:
//! null vectors and left null spaces come from the singular vectors of the
//! smallest singular values, ranks are counted against a relative cutoff, and
//! square solves are refused when the condition number exceeds the inverse of
//! that cutoff.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dense complex matrix.
pub type CMatrix = DMatrix<Complex64>;

/// Dense complex column vector.
pub type CVector = DVector<Complex64>;

/// Relative tolerances for rank decisions and residual checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    /// Singular values at or below `rank_rel_tol * sigma_max` count as zero.
    pub rank_rel_tol: f64,
    /// Residual cutoff, relative to the Frobenius norm of the operator.
    pub residual_rel_tol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rank_rel_tol: 1e-8,
            residual_rel_tol: 1e-8,
        }
    }
}

impl Tolerance {
    pub fn new(rank_rel_tol: f64, residual_rel_tol: f64) -> Result<Self, NumericsError> {
        let ok = |t: f64| t > 0.0 && t < 1.0;
        if !ok(rank_rel_tol) || !ok(residual_rel_tol) {
            return Err(NumericsError::InvalidTolerance {
                rank_rel_tol,
                residual_rel_tol,
            });
        }
        Ok(Tolerance {
            rank_rel_tol,
            residual_rel_tol,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("matrix is rank deficient: numerical rank {rank}, expected {expected}")]
    RankDeficient { rank: usize, expected: usize },
    #[error("matrix is numerically singular (condition estimate {condition:.3e})")]
    Singular { condition: f64 },
    #[error("residual {residual:.3e} exceeds tolerance {limit:.3e}")]
    Residual { residual: f64, limit: f64 },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("tolerances must lie in (0, 1), got rank {rank_rel_tol} and residual {residual_rel_tol}")]
    InvalidTolerance {
        rank_rel_tol: f64,
        residual_rel_tol: f64,
    },
}

fn ensure_finite(a: &CMatrix) -> Result<(), NumericsError> {
    if a.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(NumericsError::NonFinite)
    }
}

/// SVD with singular values sorted in descending order and the factors
/// permuted to match. For an `m x n` input, `u` is `m x k` and `v` is `n x k`
/// with `k = min(m, n)`.
struct SortedSvd {
    u: CMatrix,
    sigma: Vec<f64>,
    /// Right singular vectors as columns.
    v: CMatrix,
}

fn sorted_svd(a: CMatrix, want_u: bool, want_v: bool) -> SortedSvd {
    let (m, n) = a.shape();
    let k = m.min(n);
    let svd = a.svd(want_u, want_v);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&x, &y| svd.singular_values[y].total_cmp(&svd.singular_values[x]));
    let sigma = order.iter().map(|&i| svd.singular_values[i]).collect();
    let u = match &svd.u {
        Some(u) => CMatrix::from_fn(m, k, |r, c| u[(r, order[c])]),
        None => CMatrix::zeros(0, 0),
    };
    let v = match &svd.v_t {
        Some(vt) => CMatrix::from_fn(n, k, |r, c| vt[(order[c], r)].conj()),
        None => CMatrix::zeros(0, 0),
    };
    SortedSvd { u, sigma, v }
}

/// Embeds `a` into the top-left corner of a `rows x cols` zero matrix.
fn pad(a: &CMatrix, rows: usize, cols: usize) -> CMatrix {
    let mut out = CMatrix::zeros(rows, cols);
    out.view_mut((0, 0), (a.nrows(), a.ncols())).copy_from(a);
    out
}

/// Full left singular basis (`rows x rows`) and sorted singular values.
/// Tall inputs are padded with zero columns so the SVD returns a square `U`.
fn full_left_svd(a: &CMatrix) -> SortedSvd {
    let (rows, cols) = a.shape();
    if rows > cols {
        sorted_svd(pad(a, rows, rows), true, false)
    } else {
        sorted_svd(a.clone(), true, false)
    }
}

fn rank_from_sigma(sigma: &[f64], tol: &Tolerance) -> usize {
    let max = sigma.first().copied().unwrap_or(0.0);
    if max <= 0.0 {
        return 0;
    }
    sigma.iter().filter(|&&s| s > tol.rank_rel_tol * max).count()
}

/// Singular values of `a` in descending order.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = a.clone().singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Rotates `v` so that its first significant entry is real and positive.
pub fn canonical_phase(v: &mut CVector, tol: &Tolerance) {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if let Some(lead) = v.iter().find(|z| z.norm() > tol.rank_rel_tol * max).copied() {
        let rot = lead.conj() / lead.norm();
        v.iter_mut().for_each(|z| *z *= rot);
    }
}

/// Unit-norm vector spanning the one-dimensional null space of a wide matrix.
///
/// The result is the right singular vector of the smallest singular value,
/// with its phase fixed by [`canonical_phase`].
pub fn null_vector(a: &CMatrix, tol: &Tolerance) -> Result<CVector, NumericsError> {
    let (rows, cols) = a.shape();
    if rows == 0 || rows >= cols {
        return Err(NumericsError::Shape(format!(
            "null_vector needs rows < cols, got {rows}x{cols}"
        )));
    }
    ensure_finite(a)?;
    // Zero rows leave the right singular structure intact and make V square.
    let svd = sorted_svd(pad(a, cols, cols), false, true);
    let rank = rank_from_sigma(&svd.sigma[..rows], tol);
    if rank < rows {
        return Err(NumericsError::RankDeficient {
            rank,
            expected: rows,
        });
    }
    let mut v: CVector = svd.v.column(cols - 1).into_owned();
    v /= Complex64::new(v.norm(), 0.0);
    canonical_phase(&mut v, tol);
    let residual = (a * &v).norm();
    let limit = tol.residual_rel_tol * a.norm();
    if residual > limit {
        return Err(NumericsError::Residual { residual, limit });
    }
    Ok(v)
}

/// Number of singular values above `rank_rel_tol` times the largest one.
pub fn numerical_rank(a: &CMatrix, tol: &Tolerance) -> usize {
    if a.is_empty() {
        return 0;
    }
    rank_from_sigma(&singular_values(a), tol)
}

/// `sigma_min / sigma_max` of a square matrix; zero for the zero matrix.
pub fn inverse_condition(a: &CMatrix) -> f64 {
    let s = singular_values(a);
    match (s.first(), s.last()) {
        (Some(&max), Some(&min)) if max > 0.0 => min / max,
        _ => 0.0,
    }
}

/// Solves `A X = B` for square `A` and any number of right-hand-side columns.
pub fn solve_square(a: &CMatrix, b: &CMatrix, tol: &Tolerance) -> Result<CMatrix, NumericsError> {
    let n = a.nrows();
    if n == 0 || a.ncols() != n || b.nrows() != n {
        return Err(NumericsError::Shape(format!(
            "solve_square needs square A and matching rhs, got {}x{} and {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    ensure_finite(a)?;
    ensure_finite(b)?;
    let rcond = inverse_condition(a);
    if rcond <= tol.rank_rel_tol {
        return Err(NumericsError::Singular {
            condition: 1.0 / rcond,
        });
    }
    let x = a
        .clone()
        .lu()
        .solve(b)
        .ok_or(NumericsError::Singular { condition: f64::INFINITY })?;
    let residual = (a * &x - b).norm();
    let limit = tol.residual_rel_tol * a.norm() * x.norm();
    if residual > limit {
        return Err(NumericsError::Residual { residual, limit });
    }
    Ok(x)
}

/// Orthonormal basis `N` of the left null space of `a`, so that `N^H a ~ 0`.
///
/// The number of columns equals `rows - numerical_rank(a)`; a matrix with
/// full row rank yields an empty `rows x 0` basis.
pub fn left_null_basis(a: &CMatrix, tol: &Tolerance) -> Result<CMatrix, NumericsError> {
    let (rows, _) = a.shape();
    if rows == 0 {
        return Err(NumericsError::Shape("left_null_basis of an empty matrix".into()));
    }
    ensure_finite(a)?;
    let svd = full_left_svd(a);
    let rank = rank_from_sigma(&svd.sigma, tol);
    Ok(svd.u.columns(rank, rows - rank).into_owned())
}

/// Orthonormal basis of the column space of `a` (its leading left singular
/// vectors, one per nonzero singular value).
pub fn column_space_basis(a: &CMatrix, tol: &Tolerance) -> Result<CMatrix, NumericsError> {
    ensure_finite(a)?;
    let svd = full_left_svd(a);
    let rank = rank_from_sigma(&svd.sigma, tol);
    Ok(svd.u.columns(0, rank).into_owned())
}

/// Draws `count` i.i.d. circularly-symmetric complex Gaussians with unit variance.
pub fn sample_complex_gaussian<R: Rng + ?Sized>(rng: &mut R, count: usize) -> Vec<Complex64> {
    (0..count).map(|_| complex_gaussian(rng)).collect()
}

pub(crate) fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Bilinear (non-conjugating) 3-vector cross product.
pub fn cross3(a: &[Complex64; 3], b: &[Complex64; 3]) -> [Complex64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}
