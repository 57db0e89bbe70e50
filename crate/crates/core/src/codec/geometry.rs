//! Chordal geometry on the Grassmann manifold and decision regions.

use num_complex::Complex64;

use super::symbol::GrassmannSymbol;
use crate::error::{invalid, Result};
use crate::linalg::{frobenius, is_column_orthonormal, CMatrix};

const ORTHONORMAL_TOL: f64 = 1e-8;

/// Row norms closer than this are treated as tied.
const TIE_TOL: f64 = 1e-12;

/// Chordal distance `sqrt(L − ‖MᴴN‖_F²)` between the column spans of two
/// column-orthonormal `T × L` matrices. For `L = 2` this is
/// `sqrt(2 − |tr(MᴴN·NᴴM)|)`.
pub fn chordal_distance(m: &CMatrix, n: &CMatrix) -> Result<f64> {
    if m.shape() != n.shape() {
        return invalid(format!("shape mismatch: {:?} vs {:?}", m.shape(), n.shape()));
    }
    if !is_column_orthonormal(m, ORTHONORMAL_TOL) || !is_column_orthonormal(n, ORTHONORMAL_TOL) {
        return invalid("chordal distance needs column-orthonormal inputs");
    }
    let overlap = frobenius(&(m.adjoint() * n));
    Ok((m.ncols() as f64 - overlap * overlap).max(0.0).sqrt())
}

/// The region centre `G^(p,q)`: ones at `(p, 0)` and `(q, 1)`.
pub fn cell_point(p: usize, q: usize, t: usize) -> Result<GrassmannSymbol> {
    if !(p < q && q < t) {
        return invalid(format!("({p}, {q}) is not an ordered pair below T = {t}"));
    }
    let mut g = CMatrix::zeros(t, 2);
    g[(p, 0)] = Complex64::new(1.0, 0.0);
    g[(q, 1)] = Complex64::new(1.0, 0.0);
    Ok(GrassmannSymbol::from_matrix_unchecked(g))
}

fn row_norms(m: &CMatrix) -> Vec<f64> {
    m.row_iter()
        .map(|r| r.iter().map(|z| z.norm_sqr()).sum())
        .collect()
}

fn argmax_excluding(norms: &[f64], skip: Option<usize>) -> usize {
    let mut best: Option<usize> = None;
    for (i, &v) in norms.iter().enumerate() {
        if Some(i) == skip {
            continue;
        }
        match best {
            Some(b) if v <= norms[b] + TIE_TOL => {}
            _ => best = Some(i),
        }
    }
    best.expect("at least one row")
}

fn check_nonzero(m: &CMatrix) -> Result<()> {
    let norm = frobenius(m);
    if m.nrows() == 0 || norm <= 0.0 || !norm.is_finite() {
        return invalid("dominant-row detection needs a finite nonzero matrix");
    }
    Ok(())
}

/// Row pair `(p, q)`, `p < q`, with the two largest squared row norms.
///
/// This is the decision region with the smallest chordal distance to the
/// column span. Ties (within 1e-12) go to the smaller index.
pub fn detect_dominant_pair(m: &CMatrix) -> Result<(usize, usize)> {
    check_nonzero(m)?;
    if m.nrows() < 2 {
        return invalid("need at least two rows");
    }
    let norms = row_norms(m);
    let first = argmax_excluding(&norms, None);
    let second = argmax_excluding(&norms, Some(first));
    Ok((first.min(second), first.max(second)))
}

/// Single dominant row for the rank-1 constellation.
pub fn dominant_row(m: &CMatrix) -> Result<usize> {
    check_nonzero(m)?;
    Ok(argmax_excluding(&row_norms(m), None))
}
