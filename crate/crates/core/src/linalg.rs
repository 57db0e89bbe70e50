//! Small complex dense-matrix helpers on top of `nalgebra`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::rng::complex_gaussian;

pub type CMatrix = DMatrix<Complex64>;

/// Relative threshold on the singular-value spread for full column rank.
pub const RANK_TOL: f64 = 1e-10;

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `‖MᴴM − I‖_F`.
pub fn gram_deviation(m: &CMatrix) -> f64 {
    let mut g = m.adjoint() * m;
    for i in 0..g.nrows() {
        g[(i, i)] -= Complex64::new(1.0, 0.0);
    }
    frobenius(&g)
}

pub fn is_column_orthonormal(m: &CMatrix, tol: f64) -> bool {
    gram_deviation(m) <= tol
}

/// Smallest-to-largest singular value ratio ≥ [`RANK_TOL`].
pub fn has_full_column_rank(m: &CMatrix) -> bool {
    if m.ncols() == 0 || m.nrows() < m.ncols() {
        return false;
    }
    let sv = m.clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    max > 0.0 && max.is_finite() && min >= RANK_TOL * max
}

/// Thin QR factorization `m = Q·R` with `Q` column-orthonormal.
///
/// Fails when `m` is numerically rank deficient.
pub fn thin_qr(m: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    if !has_full_column_rank(m) {
        return Err(Error::CanonicalizationFailure(format!(
            "{}x{} factor is rank deficient",
            m.nrows(),
            m.ncols()
        )));
    }
    let qr = m.clone().qr();
    Ok((qr.q(), qr.r()))
}

/// Column-orthonormal basis of the column space of `m`.
pub fn orthonormal_basis(m: &CMatrix) -> Result<CMatrix> {
    thin_qr(m).map(|(q, _)| q)
}

/// A `rows × cols` matrix with i.i.d. standard complex Gaussian entries.
pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    // column-major fill keeps draws reproducible independent of nalgebra internals
    let mut m = CMatrix::zeros(rows, cols);
    for c in 0..cols {
        for r in 0..rows {
            m[(r, c)] = complex_gaussian(rng);
        }
    }
    m
}

/// Haar-like random column-orthonormal `rows × cols` matrix.
pub fn random_orthonormal<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    loop {
        let g = gaussian_matrix(rows, cols, rng);
        if let Ok(q) = orthonormal_basis(&g) {
            return q;
        }
    }
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// `S⁻ᵀ` for a square nonsingular matrix.
pub fn inverse_transpose(s: &CMatrix) -> Result<CMatrix> {
    match s.clone().try_inverse() {
        Some(inv) => Ok(inv.transpose()),
        None => invalid("matrix is singular"),
    }
}

pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}
