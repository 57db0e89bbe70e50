//! Per-user link parameters: the two sub-constellations plus the outer code.

use crate::codec::{build_symbol, demap_symbol, Bits, CodecParams, GrassmannSymbol, DEFAULT_F};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::outer::{BchCode, DecodeStatus};

/// Everything needed to turn a `B0`-bit payload into the pair `(A, B)` and
/// back.
#[derive(Debug, Clone)]
pub struct LinkParams {
    pub a: CodecParams,
    pub b: CodecParams,
    pub outer: BchCode,
}

impl LinkParams {
    /// `payload_bits` information bits, BCH-coded over GF(2^`bch_m`) with
    /// capability `bch_t`, then split `bits_a`/`bits_b` across the `T1`- and
    /// `T2`-row symbols.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        t1: usize,
        t2: usize,
        l: usize,
        payload_bits: usize,
        bits_a: usize,
        bits_b: usize,
        bch_m: u32,
        bch_t: usize,
        f: f64,
    ) -> Result<Self> {
        let a = CodecParams::new(t1, l, bits_a, f)?;
        let b = CodecParams::new(t2, l, bits_b, f)?;
        let outer = BchCode::with_lengths(bch_m, bch_t, bits_a + bits_b, payload_bits)
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(Self { a, b, outer })
    }

    /// `(T1, T2) = (30, 24)`, 204 payload bits, (220, 204) BCH, 124/96 split.
    pub fn full_scale() -> Self {
        Self::new(30, 24, 2, 204, 124, 96, 8, 2, DEFAULT_F).expect("valid built-in config")
    }

    /// Desk-scale `(T1, T2) = (10, 8)`: one bit per cube-split part, (65, 51)
    /// BCH with `t = 2`.
    pub fn desk() -> Self {
        Self::new(10, 8, 2, 51, 37, 28, 7, 2, DEFAULT_F).expect("valid built-in config")
    }

    pub fn l(&self) -> usize {
        self.a.l
    }

    pub fn t1(&self) -> usize {
        self.a.t
    }

    pub fn t2(&self) -> usize {
        self.b.t
    }

    /// Channel uses per user, `T1·T2`.
    pub fn channel_uses(&self) -> usize {
        self.a.t * self.b.t
    }

    pub fn payload_bits(&self) -> usize {
        self.outer.k_eff()
    }

    pub fn coded_bits(&self) -> usize {
        self.a.ell + self.b.ell
    }

    pub fn encode_payload(&self, payload: &Bits) -> Result<Bits> {
        self.outer.encode(payload)
    }

    /// Symbols `(A, B)` for a coded word of `coded_bits()` bits.
    pub fn symbols(&self, coded: &Bits) -> Result<(GrassmannSymbol, GrassmannSymbol)> {
        if coded.len() != self.coded_bits() {
            return Err(Error::InvalidArgument(format!(
                "coded word must be {} bits, got {}",
                self.coded_bits(),
                coded.len()
            )));
        }
        let a = build_symbol(&coded.slice(0, self.a.ell), &self.a)?;
        let b = build_symbol(&coded.slice(self.a.ell, coded.len()), &self.b)?;
        Ok((a, b))
    }

    /// Unit-power-free signal `A·Bᵀ` of a payload, `‖A·Bᵀ‖_F² = L`.
    pub fn payload_signal(&self, payload: &Bits) -> Result<CMatrix> {
        let (a, b) = self.symbols(&self.encode_payload(payload)?)?;
        Ok(a.matrix() * b.matrix().transpose())
    }

    /// Demap a recovered pair of subspace bases and run the outer decoder,
    /// correcting at most `max_corrections` bit errors.
    pub fn decode_term(
        &self,
        a_hat: &CMatrix,
        b_hat: &CMatrix,
        max_corrections: usize,
    ) -> Result<(Bits, DecodeStatus)> {
        let da = demap_symbol(a_hat, &self.a)?;
        let db = demap_symbol(b_hat, &self.b)?;
        self.outer.decode_limited(&da.bits.concat(&db.bits), max_corrections)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frobenius;

    #[test]
    fn builtin_configs() {
        let p = LinkParams::full_scale();
        assert_eq!((p.t1(), p.t2(), p.coded_bits(), p.payload_bits()), (30, 24, 220, 204));
        assert_eq!((p.a.ell1, p.b.ell1), (8, 8));
        let d = LinkParams::desk();
        assert_eq!((d.coded_bits(), d.payload_bits()), (65, 51));
        assert!(d.a.part_lengths.iter().chain(&d.b.part_lengths).all(|&l| l == 1));
    }

    #[test]
    fn mismatched_code_is_config_error() {
        let err = LinkParams::new(10, 8, 2, 50, 37, 28, 7, 2, 2.0).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn signal_energy_is_l_and_decodes() {
        let d = LinkParams::desk();
        let payload = Bits::from_uint(0x1234_5678_9abc, 51);
        let s = d.payload_signal(&payload).unwrap();
        assert!((frobenius(&s).powi(2) - 2.0).abs() < 1e-12);
        let (a, b) = d.symbols(&d.encode_payload(&payload).unwrap()).unwrap();
        let (got, status) = d.decode_term(a.matrix(), b.matrix(), 2).unwrap();
        assert_eq!(got, payload);
        assert_eq!(status, DecodeStatus::Ok);
    }
}
