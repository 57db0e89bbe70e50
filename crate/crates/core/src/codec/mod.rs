//! Grassmann constellation codec.
//!
//! A payload of `ℓ` bits becomes a `T × L` matrix with orthonormal columns.
//! The first `ℓ₁` bits choose which `L` rows dominate the row norms (the
//! "dominant rows"); the remaining `ℓ₂` bits are split into `4T − 8` parts
//! (`L = 2`) or `2T − 2` parts (`L = 1`) and cube-split mapped onto complex
//! coordinates that fill the other rows. Dominant-row positions survive any
//! right rotation and scaling of the symbol, which is all the receiver can
//! recover, and the known dominant-row structure lets the demapper undo the
//! rotation algebraically.

mod bits;
mod cube_split;
mod geometry;
mod pairs;
mod symbol;

pub use bits::Bits;
pub use cube_split::{cube_split_scalar, inverse_cube_split, CLAMP_RADIUS, MAX_PART_BITS};
pub use geometry::{cell_point, chordal_distance, detect_dominant_pair, dominant_row};
pub use pairs::{index_from_pair, pair_count, pair_from_index};
pub use symbol::{
    build_symbol, build_symbol_rank1, demap_symbol, demap_symbol_rank1, demap_symbol_pair, Demapped,
    GrassmannSymbol,
};

use crate::error::{invalid, Error, Result};

/// Default pilot amplitude of the dominant rows.
pub const DEFAULT_F: f64 = 2.0;

/// Constellation constants of one sub-constellation.
#[derive(Debug, Clone, PartialEq)]
pub struct CodecParams {
    /// Symbol height.
    pub t: usize,
    /// Subspace dimension, 1 or 2.
    pub l: usize,
    /// Bits per symbol.
    pub ell: usize,
    /// Dominant-row bits.
    pub ell1: usize,
    /// Coordinate bits.
    pub ell2: usize,
    /// Bit length of each cube-split part.
    pub part_lengths: Vec<usize>,
    /// Pilot amplitude, strictly above √2.
    pub f: f64,
}

impl CodecParams {
    pub fn new(t: usize, l: usize, ell: usize, f: f64) -> Result<Self> {
        if f <= std::f64::consts::SQRT_2 || !f.is_finite() {
            return invalid(format!("pilot constant f = {f} must exceed √2"));
        }
        let (ell1, ell2, part_lengths) = bit_budget(t, l, ell)?;
        Ok(Self { t, l, ell, ell1, ell2, part_lengths, f })
    }

    /// Number of complex coordinates carried by the non-dominant entries.
    pub fn coord_count(&self) -> usize {
        self.part_lengths.len() / 2
    }
}

fn floor_log2(x: usize) -> usize {
    debug_assert!(x > 0);
    (usize::BITS - 1 - x.leading_zeros()) as usize
}

/// Dominant-row bits, coordinate bits and part lengths for an `ell`-bit
/// symbol of height `t`.
///
/// Coordinate bits are spread as evenly as possible; the longer parts come
/// first. Parts may have length zero when `ell₂` is smaller than the part
/// count; such parts carry nothing and map to the centre of their axis.
pub fn bit_budget(t: usize, l: usize, ell: usize) -> Result<(usize, usize, Vec<usize>)> {
    let (ell1, parts) = match l {
        2 if t >= 3 => (floor_log2(pairs::pair_count(t)), 4 * t - 8),
        1 if t >= 2 => (floor_log2(t), 2 * t - 2),
        1 | 2 => return invalid(format!("T = {t} is too small for L = {l}")),
        _ => return invalid(format!("only L ∈ {{1, 2}} is supported, got {l}")),
    };
    if ell < ell1 {
        return Err(Error::PayloadTooSmall { got: ell, need: ell1 });
    }
    let ell2 = ell - ell1;
    let (base, rem) = (ell2 / parts, ell2 % parts);
    let lengths: Vec<usize> = (0..parts).map(|i| base + usize::from(i < rem)).collect();
    if lengths[0] > MAX_PART_BITS {
        return invalid(format!(
            "{ell2} coordinate bits over {parts} parts exceeds {MAX_PART_BITS} bits per part"
        ));
    }
    Ok((ell1, ell2, lengths))
}
