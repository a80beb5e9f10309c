//! Dense complex linear algebra helpers shared by the numerical modules.
//!
//! Rank decisions use a relative singular-value threshold
//! `RANK_TOL * max(sigma_max, 1)`.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::{CMatrix, CVector, C64};

/// Relative threshold for numerical rank decisions.
pub const RANK_TOL: f64 = 1e-8;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn to_faer(m: &CMatrix) -> faer::Mat<C64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, C64>) -> CMatrix {
    CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Singular values of `m` in decreasing order (empty for an empty matrix).
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    to_faer(m).singular_values().expect("svd converges")
}

/// Full SVD `m = U S V*` with `U`, `V` square and singular values decreasing.
pub fn svd_full(m: &CMatrix) -> (CMatrix, Vec<f64>, CMatrix) {
    let svd = to_faer(m).svd().expect("svd converges");
    let k = m.nrows().min(m.ncols());
    let s: Vec<f64> = (0..k).map(|i| svd.S()[i].re).collect();
    (from_faer(svd.U()), s, from_faer(svd.V()))
}

/// Operator (spectral) norm.
pub fn op_norm(m: &CMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Absolute rank threshold for a given list of singular values.
pub fn rank_threshold(sv: &[f64], rel: f64) -> f64 {
    rel * sv.first().copied().unwrap_or(0.0).max(1.0)
}

/// Number of singular values above `rel * max(sigma_max, 1)`.
pub fn numerical_rank(m: &CMatrix, rel: f64) -> usize {
    let sv = singular_values(m);
    let t = rank_threshold(&sv, rel);
    sv.iter().filter(|&&s| s > t).count()
}

/// Rank together with the ratio between the smallest retained singular
/// value and the largest discarded one (`inf` when nothing is discarded or
/// nothing is retained).
pub fn rank_with_gap(sv: &[f64], rel: f64) -> (usize, f64) {
    let t = rank_threshold(sv, rel);
    let r = sv.iter().filter(|&&s| s > t).count();
    let gap = if r == 0 || r == sv.len() || sv[r] <= 0.0 {
        f64::INFINITY
    } else {
        sv[r - 1] / sv[r]
    };
    (r, gap)
}

/// Orthonormal basis (as columns) of the null space of `m`, deciding rank
/// with threshold `rel * max(sigma_max, 1)`.
pub fn null_space(m: &CMatrix, rel: f64) -> CMatrix {
    let n = m.ncols();
    if n == 0 {
        return CMatrix::zeros(0, 0);
    }
    if m.nrows() == 0 {
        return CMatrix::identity(n, n);
    }
    let (_, sv, v) = svd_full(m);
    let t = rank_threshold(&sv, rel);
    let r = sv.iter().filter(|&&x| x > t).count();
    v.columns(r, n - r).into_owned()
}

/// Orthonormal basis of the column span of `m`.
pub fn orthonormalize(m: &CMatrix, rel: f64) -> CMatrix {
    let d = m.nrows();
    if m.ncols() == 0 || d == 0 {
        return CMatrix::zeros(d, 0);
    }
    let (u, sv, _) = svd_full(m);
    // An all-zero input has empty span regardless of the relative floor.
    if sv.first().copied().unwrap_or(0.0) == 0.0 {
        return CMatrix::zeros(d, 0);
    }
    let t = rank_threshold(&sv, rel);
    let r = sv.iter().filter(|&&x| x > t).count();
    u.columns(0, r).into_owned()
}

/// Orthonormal basis of the orthogonal complement of the span of the
/// orthonormal columns `q` in `C^d`.
pub fn complement(q: &CMatrix) -> CMatrix {
    let d = q.nrows();
    if q.ncols() == 0 {
        return CMatrix::identity(d, d);
    }
    null_space(&q.adjoint(), RANK_TOL)
}

pub fn columns_to_matrix(rows: usize, cols: &[CVector]) -> CMatrix {
    let mut m = CMatrix::zeros(rows, cols.len());
    for (j, v) in cols.iter().enumerate() {
        m.set_column(j, v);
    }
    m
}

/// Horizontal concatenation of matrices with equal row counts.
pub fn hstack(parts: &[&CMatrix]) -> CMatrix {
    let rows = parts.first().map(|p| p.nrows()).unwrap_or(0);
    let cols: usize = parts.iter().map(|p| p.ncols()).sum();
    let mut m = CMatrix::zeros(rows, cols);
    let mut j = 0;
    for p in parts {
        assert_eq!(p.nrows(), rows);
        m.view_mut((0, j), (rows, p.ncols())).copy_from(*p);
        j += p.ncols();
    }
    m
}

/// Vertical concatenation of matrices with equal column counts.
pub fn vstack(parts: &[&CMatrix]) -> CMatrix {
    let cols = parts.first().map(|p| p.ncols()).unwrap_or(0);
    let rows: usize = parts.iter().map(|p| p.nrows()).sum();
    let mut m = CMatrix::zeros(rows, cols);
    let mut i = 0;
    for p in parts {
        assert_eq!(p.ncols(), cols);
        m.view_mut((i, 0), (p.nrows(), cols)).copy_from(*p);
        i += p.nrows();
    }
    m
}

pub fn eigenvalues(m: &CMatrix) -> Vec<C64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    to_faer(m).eigenvalues().expect("eigenvalues converge")
}

pub fn spectral_radius(m: &CMatrix) -> f64 {
    eigenvalues(m).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `‖U*U − I‖_F`.
pub fn unitarity_residual(u: &CMatrix) -> f64 {
    let n = u.ncols();
    (u.adjoint() * u - CMatrix::identity(n, n)).norm()
}

/// Kronecker product.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Column-stacking vectorisation.
pub fn vec_of(m: &CMatrix) -> CVector {
    CVector::from_column_slice(m.as_slice())
}

/// Inverse of [`vec_of`].
pub fn unvec(v: &CVector, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_column_slice(rows, cols, v.as_slice())
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

pub fn gaussian_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVector {
    gaussian_matrix(n, 1, rng).column(0).into_owned()
}

/// Unit vector with a rotation-invariant distribution.
pub fn random_unit_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVector {
    loop {
        let v = gaussian_vector(n, rng);
        let nv = v.norm();
        if nv > 1e-12 {
            return v / c(nv, 0.0);
        }
    }
}

/// Q factor of a QR factorisation with the diagonal of R made positive.
/// For a Gaussian input this is Haar distributed.
pub fn q_factor(m: &CMatrix) -> CMatrix {
    let qr = m.clone().qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..q.ncols() {
        let rjj = r[(j, j)];
        if rjj.norm() > 0.0 {
            let ph = rjj / rjj.norm();
            let mut col = q.column_mut(j);
            col *= ph;
        }
    }
    q
}

pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    q_factor(&gaussian_matrix(d, d, rng))
}

/// Orthogonal projector onto the span of orthonormal columns `q`.
pub fn projector(q: &CMatrix) -> CMatrix {
    q * q.adjoint()
}

/// Elementary basis vector `e_k` (0-based).
pub fn basis_vector(n: usize, k: usize) -> CVector {
    let mut v = CVector::zeros(n);
    v[k] = c(1.0, 0.0);
    v
}
