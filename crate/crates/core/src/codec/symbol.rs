//! Symbol construction and algebraic demapping.

use num_complex::Complex64;

use super::bits::Bits;
use super::cube_split::{cube_split_scalar, inverse_cube_split};
use super::geometry::{chordal_distance, detect_dominant_pair, dominant_row};
use super::pairs::{index_from_pair, pair_from_index};
use super::CodecParams;
use crate::error::{invalid, Error, Result};
use crate::linalg::{orthonormal_basis, CMatrix};

/// A `T × L` column-orthonormal constellation point.
#[derive(Debug, Clone, PartialEq)]
pub struct GrassmannSymbol {
    matrix: CMatrix,
}

impl GrassmannSymbol {
    pub(crate) fn from_matrix_unchecked(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn t(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn l(&self) -> usize {
        self.matrix.ncols()
    }
}

/// Demapper output.
#[derive(Debug, Clone, PartialEq)]
pub struct Demapped {
    pub bits: Bits,
    /// Minus the chordal distance between the estimate and the rebuilt
    /// symbol; 0 is a perfect match.
    pub confidence: f64,
}

fn check_len(bits: &Bits, params: &CodecParams) -> Result<()> {
    if bits.len() != params.ell {
        return invalid(format!("expected {} bits, got {}", params.ell, bits.len()));
    }
    Ok(())
}

/// Cube-split coordinates carried by `bits[ℓ₁..]`.
fn coords_from_bits(bits: &Bits, params: &CodecParams) -> Result<Vec<Complex64>> {
    let mut offset = params.ell1;
    let mut values = Vec::with_capacity(params.part_lengths.len());
    for &len in &params.part_lengths {
        values.push(bits.uint(offset, offset + len));
        offset += len;
    }
    values
        .chunks(2)
        .zip(params.part_lengths.chunks(2))
        .map(|(x, l)| cube_split_scalar(x[0], x[1], l[0], l[1]))
        .collect()
}

fn bits_from_coords(head: Bits, coords: &[Complex64], params: &CodecParams) -> Result<Bits> {
    let mut out = head.into_vec();
    for (alpha, l) in coords.iter().zip(params.part_lengths.chunks(2)) {
        let (xr, xi) = inverse_cube_split(*alpha, l[0], l[1])?;
        out.extend(Bits::from_uint(xr, l[0]).into_vec());
        out.extend(Bits::from_uint(xi, l[1]).into_vec());
    }
    Ok(Bits::new(out))
}

fn normalize_columns(mut m: CMatrix) -> CMatrix {
    for mut col in m.column_iter_mut() {
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        col.iter_mut().for_each(|z| *z /= norm);
    }
    m
}

/// The symbol before column scaling, `L = 2`.
pub(crate) fn unscaled_rank2(bits: &Bits, params: &CodecParams) -> Result<CMatrix> {
    check_len(bits, params)?;
    let t = params.t;
    let (p, q) = pair_from_index(bits.uint(0, params.ell1), t)?;
    let a = coords_from_bits(bits, params)?;
    let (first, second) = a.split_at(t - 2);
    let ip: Complex64 = first.iter().zip(second).map(|(x, y)| x.conj() * y).sum();
    let f = params.f;
    let mut m = CMatrix::zeros(t, 2);
    m[(p, 0)] = Complex64::new(f, 0.0);
    m[(p, 1)] = -ip / f;
    m[(q, 1)] = Complex64::new(f, 0.0);
    for (k, row) in (0..t).filter(|&r| r != p && r != q).enumerate() {
        m[(row, 0)] = first[k];
        m[(row, 1)] = second[k];
    }
    Ok(m)
}

/// Encode `params.ell` bits as a constellation symbol (`L` = 1 or 2).
pub fn build_symbol(bits: &Bits, params: &CodecParams) -> Result<GrassmannSymbol> {
    match params.l {
        1 => build_symbol_rank1(bits, params),
        2 => Ok(GrassmannSymbol::from_matrix_unchecked(normalize_columns(unscaled_rank2(
            bits, params,
        )?))),
        l => invalid(format!("unsupported L = {l}")),
    }
}

/// `L = 1` constellation: one pilot entry of amplitude `f` whose position
/// carries `⌊log₂ T⌋` bits, the other `T − 1` entries carry coordinates.
pub fn build_symbol_rank1(bits: &Bits, params: &CodecParams) -> Result<GrassmannSymbol> {
    check_len(bits, params)?;
    if params.l != 1 {
        return invalid("rank-1 builder needs L = 1 params");
    }
    let p = bits.uint(0, params.ell1) as usize;
    let a = coords_from_bits(bits, params)?;
    let mut m = CMatrix::zeros(params.t, 1);
    m[(p, 0)] = Complex64::new(params.f, 0.0);
    for (k, row) in (0..params.t).filter(|&r| r != p).enumerate() {
        m[(row, 0)] = a[k];
    }
    Ok(GrassmannSymbol::from_matrix_unchecked(normalize_columns(m)))
}

fn confidence(estimate: &CMatrix, bits: &Bits, params: &CodecParams) -> Result<f64> {
    let rebuilt = build_symbol(bits, params)?;
    let basis = orthonormal_basis(estimate).map_err(|e| Error::DemapFailure(e.to_string()))?;
    Ok(-chordal_distance(&basis, rebuilt.matrix())?)
}

fn check_estimate(estimate: &CMatrix, params: &CodecParams) -> Result<()> {
    if estimate.shape() != (params.t, params.l) {
        return invalid(format!(
            "estimate is {:?}, expected {}x{}",
            estimate.shape(),
            params.t,
            params.l
        ));
    }
    if estimate.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::DemapFailure("estimate has non-finite entries".into()));
    }
    Ok(())
}

/// Recover the bits of a (rotated, scaled) symbol estimate, `L` = 1 or 2.
///
/// Any full-rank basis of the transmitted subspace is accepted: for `L = 2`
/// the estimate is orthonormalized first, so the result does not depend on
/// the basis.
pub fn demap_symbol(estimate: &CMatrix, params: &CodecParams) -> Result<Demapped> {
    match params.l {
        1 => demap_symbol_rank1(estimate, params),
        2 => demap_rank2(estimate, params),
        l => invalid(format!("unsupported L = {l}")),
    }
}

fn demap_rank2(estimate: &CMatrix, params: &CodecParams) -> Result<Demapped> {
    check_estimate(estimate, params)?;
    let estimate = &orthonormal_basis(estimate).map_err(|e| Error::DemapFailure(e.to_string()))?;
    let (t, f) = (params.t, params.f);
    let (p, q) = detect_dominant_pair(estimate).map_err(|e| Error::DemapFailure(e.to_string()))?;
    let index = index_from_pair(p, q, t)?;
    if index >> params.ell1 != 0 {
        return Err(Error::DemapFailure(format!(
            "dominant rows ({p}, {q}) lie outside the constellation"
        )));
    }

    let mut top = CMatrix::zeros(2, 2);
    top.row_mut(0).copy_from(&estimate.row(p));
    top.row_mut(1).copy_from(&estimate.row(q));
    let det = top[(0, 0)] * top[(1, 1)] - top[(0, 1)] * top[(1, 0)];
    let scale = top.iter().map(|z| z.norm_sqr()).sum::<f64>();
    if det.norm() < 1e-12 * scale || scale == 0.0 {
        return Err(Error::DemapFailure("dominant-row block is singular".into()));
    }
    let top_inv = CMatrix::from_row_slice(2, 2, &[top[(1, 1)], -top[(0, 1)], -top[(1, 0)], top[(0, 0)]])
        / det;

    let rest_rows: Vec<usize> = (0..t).filter(|&r| r != p && r != q).collect();
    let mut rest = CMatrix::zeros(t - 2, 2);
    for (k, &r) in rest_rows.iter().enumerate() {
        rest.row_mut(k).copy_from(&estimate.row(r));
    }
    // W = Â₂·Â₁⁻¹ is blind to the unknown right factor
    let w = rest * top_inv;
    let gram = w.adjoint() * &w;
    let ip = gram[(0, 1)] * (f * f) / (Complex64::new(1.0, 0.0) + gram[(0, 0)]);
    let pilot = CMatrix::from_row_slice(
        2,
        2,
        &[Complex64::new(f, 0.0), -ip / f, Complex64::new(0.0, 0.0), Complex64::new(f, 0.0)],
    );
    let coords_m = w * pilot;
    let coords: Vec<Complex64> = coords_m.column(0).iter().chain(coords_m.column(1).iter()).copied().collect();

    let head = Bits::from_uint(index, params.ell1);
    let bits = bits_from_coords(head, &coords, params)?;
    let confidence = confidence(estimate, &bits, params)?;
    Ok(Demapped { bits, confidence })
}

/// Inverse of [`build_symbol_rank1`]: the largest entry is the pilot.
pub fn demap_symbol_rank1(estimate: &CMatrix, params: &CodecParams) -> Result<Demapped> {
    if params.l != 1 {
        return invalid("rank-1 demapper needs L = 1 params");
    }
    check_estimate(estimate, params)?;
    let p = dominant_row(estimate).map_err(|e| Error::DemapFailure(e.to_string()))?;
    if (p as u64) >> params.ell1 != 0 {
        return Err(Error::DemapFailure(format!("pilot row {p} lies outside the constellation")));
    }
    let pilot = estimate[(p, 0)];
    let coords: Vec<Complex64> = (0..params.t)
        .filter(|&r| r != p)
        .map(|r| estimate[(r, 0)] * params.f / pilot)
        .collect();
    let bits = bits_from_coords(Bits::from_uint(p as u64, params.ell1), &coords, params)?;
    let confidence = confidence(estimate, &bits, params)?;
    Ok(Demapped { bits, confidence })
}

/// Demap an `A`-side and a `B`-side estimate and concatenate their bits.
pub fn demap_symbol_pair(
    a: &CMatrix,
    b: &CMatrix,
    params_a: &CodecParams,
    params_b: &CodecParams,
) -> Result<Bits> {
    let da = demap_symbol(a, params_a)?;
    let db = demap_symbol(b, params_b)?;
    Ok(da.bits.concat(&db.bits))
}
