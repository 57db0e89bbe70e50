//! Shortened narrow-sense binary BCH outer code.
//!
//! Codewords are systematic and most-significant-bit first: bit `0` of a
//! codeword is the coefficient of `x^(n_eff − 1)`. The first `k_eff` bits are
//! the payload verbatim, the last `n − k` bits are parity. Decoding is
//! syndrome computation, Berlekamp-Massey and a Chien search restricted to
//! the positions that survive shortening.

use crate::codec::Bits;
use crate::error::{invalid, Result};

/// Primitive polynomials for GF(2^m), bit `i` = coefficient of `x^i`.
const PRIMITIVE_POLYS: [(u32, u32); 14] = [
    (3, 0b1011),
    (4, 0x13),
    (5, 0x25),
    (6, 0x43),
    (7, 0x89),
    (8, 0x11d),
    (9, 0x211),
    (10, 0x409),
    (11, 0x805),
    (12, 0x1053),
    (13, 0x201b),
    (14, 0x4443),
    (15, 0x8003),
    (16, 0x1100b),
];

#[derive(Debug, Clone)]
struct Gf {
    m: u32,
    order: usize,
    exp: Vec<u16>,
    log: Vec<u16>,
}

impl Gf {
    fn new(m: u32) -> Result<Self> {
        let poly = match PRIMITIVE_POLYS.iter().find(|(mm, _)| *mm == m) {
            Some(&(_, p)) => p,
            None => return invalid(format!("field exponent m = {m} outside 3..=16")),
        };
        let order = (1usize << m) - 1;
        let mut exp = vec![0u16; 2 * order];
        let mut log = vec![0u16; order + 1];
        let mut x: u32 = 1;
        for (i, e) in exp.iter_mut().take(order).enumerate() {
            *e = x as u16;
            log[x as usize] = i as u16;
            x <<= 1;
            if x & (1 << m) != 0 {
                x ^= poly;
            }
        }
        for i in order..2 * order {
            exp[i] = exp[i - order];
        }
        Ok(Self { m, order, exp, log })
    }

    #[inline]
    fn mul(&self, a: u16, b: u16) -> u16 {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[self.log[a as usize] as usize + self.log[b as usize] as usize]
    }

    #[inline]
    fn inv(&self, a: u16) -> u16 {
        debug_assert!(a != 0);
        self.exp[(self.order - self.log[a as usize] as usize) % self.order]
    }

    #[inline]
    fn alpha_pow(&self, e: usize) -> u16 {
        self.exp[e % self.order]
    }
}

/// Decoder verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeStatus {
    Ok,
    Corrected(usize),
    DetectedUncorrectable,
}

impl DecodeStatus {
    pub fn is_valid(self) -> bool {
        !matches!(self, DecodeStatus::DetectedUncorrectable)
    }
}

/// Parameters and tables of a shortened `(n_eff, k_eff)` BCH code.
#[derive(Debug, Clone)]
pub struct BchCode {
    gf: Gf,
    t: usize,
    n: usize,
    k: usize,
    shorten: usize,
    /// Generator coefficients, index = power of x.
    generator: Vec<bool>,
}

impl BchCode {
    /// Narrow-sense primitive code over GF(2^m) correcting `t` errors,
    /// shortened by `shorten` bits.
    pub fn new(m: u32, t: usize, shorten: usize) -> Result<Self> {
        if t == 0 {
            return invalid("correction capability t must be at least 1");
        }
        let gf = Gf::new(m)?;
        let n = gf.order;
        if 2 * t >= n {
            return invalid(format!("t = {t} too large for n = {n}"));
        }
        let generator = generator_poly(&gf, t);
        let parity = generator.len() - 1;
        if parity >= n {
            return invalid(format!("t = {t} leaves no information bits at n = {n}"));
        }
        let k = n - parity;
        if shorten >= k {
            return invalid(format!("shortening by {shorten} leaves no payload (k = {k})"));
        }
        Ok(Self { gf, t, n, k, shorten, generator })
    }

    /// The shortest code of capability `t` over GF(2^m) with the requested
    /// effective lengths, if the parity count matches.
    pub fn with_lengths(m: u32, t: usize, n_eff: usize, k_eff: usize) -> Result<Self> {
        let full = Self::new(m, t, 0)?;
        if n_eff > full.n || k_eff == 0 || k_eff >= n_eff {
            return invalid(format!("({n_eff}, {k_eff}) does not fit a length-{} code", full.n));
        }
        if n_eff - k_eff != full.n - full.k {
            return invalid(format!(
                "({n_eff}, {k_eff}) has {} parity bits but the m = {m}, t = {t} code has {}",
                n_eff - k_eff,
                full.n - full.k
            ));
        }
        Self::new(m, t, full.n - n_eff)
    }

    pub fn m(&self) -> u32 {
        self.gf.m
    }
    pub fn t(&self) -> usize {
        self.t
    }
    /// Native length `2^m − 1`.
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn k(&self) -> usize {
        self.k
    }
    pub fn shorten(&self) -> usize {
        self.shorten
    }
    pub fn n_eff(&self) -> usize {
        self.n - self.shorten
    }
    pub fn k_eff(&self) -> usize {
        self.k - self.shorten
    }
    pub fn parity_bits(&self) -> usize {
        self.n - self.k
    }

    /// Generator polynomial, index = power of x.
    pub fn generator(&self) -> &[bool] {
        &self.generator
    }

    /// Systematic encoding: payload followed by parity.
    pub fn encode(&self, payload: &Bits) -> Result<Bits> {
        if payload.len() != self.k_eff() {
            return invalid(format!("payload must be {} bits, got {}", self.k_eff(), payload.len()));
        }
        let r = self.parity_bits();
        // LFSR division of payload(x)·x^r by g(x); reg[i] = coefficient of x^i
        let mut reg = vec![false; r];
        for &bit in payload.as_slice() {
            let feedback = bit ^ reg[r - 1];
            for i in (1..r).rev() {
                reg[i] = reg[i - 1] ^ (feedback && self.generator[i]);
            }
            reg[0] = feedback && self.generator[0];
        }
        let mut out = payload.as_slice().to_vec();
        out.extend(reg.iter().rev());
        Ok(Bits::new(out))
    }

    fn syndromes(&self, word: &[bool]) -> Vec<u16> {
        (1..=2 * self.t)
            .map(|j| {
                let a = self.gf.alpha_pow(j);
                word.iter()
                    .fold(0u16, |acc, &b| self.gf.mul(acc, a) ^ u16::from(b))
            })
            .collect()
    }

    /// Berlekamp-Massey; returns the error-locator polynomial (index = power).
    fn error_locator(&self, s: &[u16]) -> Vec<u16> {
        let gf = &self.gf;
        let mut c = vec![1u16];
        let mut b = vec![1u16];
        let mut len = 0usize;
        let mut shift = 1usize;
        let mut last = 1u16;
        for i in 0..s.len() {
            let mut d = s[i];
            for j in 1..=len.min(c.len() - 1) {
                d ^= gf.mul(c[j], s[i - j]);
            }
            if d == 0 {
                shift += 1;
                continue;
            }
            let coef = gf.mul(d, gf.inv(last));
            let prev = c.clone();
            if c.len() < b.len() + shift {
                c.resize(b.len() + shift, 0);
            }
            for (j, &bj) in b.iter().enumerate() {
                c[j + shift] ^= gf.mul(coef, bj);
            }
            if 2 * len <= i {
                len = i + 1 - len;
                b = prev;
                last = d;
                shift = 1;
            } else {
                shift += 1;
            }
        }
        c.truncate(len + 1);
        c.resize(len + 1, 0);
        c
    }

    /// Decode a received word of `n_eff` bits; at most `max_corrections`
    /// (capped at `t`) errors are corrected.
    pub fn decode_limited(&self, word: &Bits, max_corrections: usize) -> Result<(Bits, DecodeStatus)> {
        if word.len() != self.n_eff() {
            return invalid(format!("codeword must be {} bits, got {}", self.n_eff(), word.len()));
        }
        let k_eff = self.k_eff();
        let s = self.syndromes(word.as_slice());
        if s.iter().all(|&v| v == 0) {
            return Ok((word.slice(0, k_eff), DecodeStatus::Ok));
        }
        let locator = self.error_locator(&s);
        let degree = locator.len() - 1;
        if degree == 0 || degree > self.t.min(max_corrections) {
            return Ok((word.slice(0, k_eff), DecodeStatus::DetectedUncorrectable));
        }
        // Chien search: bit index b ↔ power e = n_eff − 1 − b; error at x^e
        // iff Λ(α^(−e)) = 0
        let n_eff = self.n_eff();
        let mut positions = Vec::with_capacity(degree);
        for e in 0..n_eff {
            let x = self.gf.alpha_pow(self.n - e % self.n);
            let mut acc = 0u16;
            for &coef in locator.iter().rev() {
                acc = self.gf.mul(acc, x) ^ coef;
            }
            if acc == 0 {
                positions.push(n_eff - 1 - e);
            }
        }
        if positions.len() != degree {
            return Ok((word.slice(0, k_eff), DecodeStatus::DetectedUncorrectable));
        }
        let mut fixed = word.clone();
        for &p in &positions {
            fixed.flip(p);
        }
        Ok((fixed.slice(0, k_eff), DecodeStatus::Corrected(degree)))
    }

    /// Bounded-distance decoding up to `t` errors.
    pub fn decode(&self, word: &Bits) -> Result<(Bits, DecodeStatus)> {
        self.decode_limited(word, self.t)
    }
}

/// Minimal polynomial of α^i over GF(2), index = power.
fn minimal_poly(gf: &Gf, i: usize) -> Vec<bool> {
    let mut coset = vec![i % gf.order];
    let mut e = (2 * i) % gf.order;
    while e != coset[0] {
        coset.push(e);
        e = (2 * e) % gf.order;
    }
    // Π (x − α^e) with GF(2^m) coefficients
    let mut poly = vec![1u16];
    for &e in &coset {
        let root = gf.alpha_pow(e);
        let mut next = vec![0u16; poly.len() + 1];
        for (j, &c) in poly.iter().enumerate() {
            next[j + 1] ^= c;
            next[j] ^= gf.mul(c, root);
        }
        poly = next;
    }
    poly.iter().map(|&c| {
        debug_assert!(c <= 1, "minimal polynomial must be binary");
        c == 1
    }).collect()
}

fn poly_mul_gf2(a: &[bool], b: &[bool]) -> Vec<bool> {
    let mut out = vec![false; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] ^= y;
            }
        }
    }
    out
}

fn generator_poly(gf: &Gf, t: usize) -> Vec<bool> {
    let mut seen = vec![false; gf.order];
    let mut g = vec![true];
    for i in 1..=2 * t {
        let rep = i % gf.order;
        if seen[rep] {
            continue;
        }
        let mut e = rep;
        loop {
            seen[e] = true;
            e = (2 * e) % gf.order;
            if e == rep {
                break;
            }
        }
        g = poly_mul_gf2(&g, &minimal_poly(gf, i));
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::index::sample;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_bits(rng: &mut ChaCha8Rng, len: usize) -> Bits {
        Bits::new((0..len).map(|_| rng.random()).collect())
    }

    // Reference long division over GF(2): remainder of word(x) by g(x).
    fn remainder_by_division(word: &[bool], g: &[bool]) -> Vec<bool> {
        // word is MSB first; convert to power-indexed
        let mut r: Vec<bool> = word.iter().rev().copied().collect();
        let dg = g.len() - 1;
        for deg in (dg..r.len()).rev() {
            if r[deg] {
                for (j, &gj) in g.iter().enumerate() {
                    r[deg - dg + j] ^= gj;
                }
            }
        }
        r.truncate(dg);
        r
    }

    #[test]
    fn lengths_of_the_standard_codes() {
        let c = BchCode::with_lengths(8, 2, 220, 204).unwrap();
        assert_eq!((c.n(), c.k(), c.shorten()), (255, 239, 35));
        let c = BchCode::with_lengths(9, 5, 440, 395).unwrap();
        assert_eq!((c.n(), c.k(), c.shorten()), (511, 466, 71));
        let c = BchCode::new(7, 2, 62).unwrap();
        assert_eq!((c.n_eff(), c.k_eff()), (65, 51));
        assert!(BchCode::with_lengths(8, 2, 220, 200).is_err());
        assert!(BchCode::new(2, 1, 0).is_err());
        assert!(BchCode::new(8, 0, 0).is_err());
    }

    #[test]
    fn codewords_divisible_by_generator() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for (m, t, s) in [(8, 2, 35), (9, 5, 71), (7, 2, 62), (4, 1, 0)] {
            let code = BchCode::new(m, t, s).unwrap();
            for _ in 0..20 {
                let x = random_bits(&mut rng, code.k_eff());
                let c = code.encode(&x).unwrap();
                assert_eq!(c.len(), code.n_eff());
                assert_eq!(c.slice(0, code.k_eff()), x);
                assert!(remainder_by_division(c.as_slice(), code.generator()).iter().all(|&b| !b));
            }
        }
    }

    #[test]
    fn hamming_7_4_generator() {
        // m = 3, t = 1 is the (7, 4) Hamming code with g = x³ + x + 1
        let code = BchCode::new(3, 1, 0).unwrap();
        assert_eq!(code.generator(), &[true, true, false, true]);
    }

    #[test]
    fn zero_payload_and_linearity() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let code = BchCode::with_lengths(8, 2, 220, 204).unwrap();
        let z = code.encode(&Bits::zeros(204)).unwrap();
        assert_eq!(z.weight(), 0);
        for _ in 0..20 {
            let x = random_bits(&mut rng, 204);
            let y = random_bits(&mut rng, 204);
            let lhs = code.encode(&x.xor(&y)).unwrap();
            let rhs = code.encode(&x).unwrap().xor(&code.encode(&y).unwrap());
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn clean_word_decodes_ok() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let code = BchCode::with_lengths(8, 2, 220, 204).unwrap();
        let x = random_bits(&mut rng, 204);
        let c = code.encode(&x).unwrap();
        assert_eq!(code.decode(&c).unwrap(), (x, DecodeStatus::Ok));
        assert!(code.decode(&Bits::zeros(219)).is_err());
        assert!(code.encode(&Bits::zeros(203)).is_err());
    }

    #[test]
    fn every_single_error_corrected() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let code = BchCode::with_lengths(8, 2, 220, 204).unwrap();
        let x = random_bits(&mut rng, 204);
        let c = code.encode(&x).unwrap();
        for pos in 0..220 {
            let mut w = c.clone();
            w.flip(pos);
            assert_eq!(code.decode(&w).unwrap(), (x.clone(), DecodeStatus::Corrected(1)));
        }
    }

    #[test]
    fn t_random_errors_corrected() {
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        for (m, t, s) in [(8, 2, 35), (9, 5, 71)] {
            let code = BchCode::new(m, t, s).unwrap();
            for _ in 0..1000 {
                let x = random_bits(&mut rng, code.k_eff());
                let mut w = code.encode(&x).unwrap();
                for p in sample(&mut rng, code.n_eff(), t) {
                    w.flip(p);
                }
                assert_eq!(code.decode(&w).unwrap(), (x, DecodeStatus::Corrected(t)));
            }
        }
    }

    #[test]
    fn correction_limit_turns_corrections_into_detections() {
        let mut rng = ChaCha8Rng::seed_from_u64(36);
        let code = BchCode::with_lengths(8, 2, 220, 204).unwrap();
        let x = random_bits(&mut rng, 204);
        let mut w = code.encode(&x).unwrap();
        w.flip(17);
        assert_eq!(code.decode_limited(&w, 0).unwrap().1, DecodeStatus::DetectedUncorrectable);
        assert_eq!(code.decode_limited(&w, 1).unwrap().1, DecodeStatus::Corrected(1));
    }

    // A bounded-distance decoder for the t = 2 code accepts any weight-5
    // pattern whose syndrome is that of a weight ≤ 2 pattern. Counting
    // codewords of weight 5..7 near a random weight-5 pattern predicts
    // acceptance of roughly 37% at n = 220; the rest must be flagged.
    #[test]
    fn weight5_detection_rate_matches_coset_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let code = BchCode::with_lengths(8, 2, 220, 204).unwrap();
        let trials = 2000;
        let mut detected = 0;
        for _ in 0..trials {
            let x = random_bits(&mut rng, 204);
            let mut w = code.encode(&x).unwrap();
            for p in sample(&mut rng, 220, 5) {
                w.flip(p);
            }
            let (_, status) = code.decode(&w).unwrap();
            if status == DecodeStatus::DetectedUncorrectable {
                detected += 1;
            }
        }
        let rate = detected as f64 / trials as f64;
        assert!((0.55..0.72).contains(&rate), "detection rate {rate}");
        // with correction disabled the same patterns are essentially always caught
        let mut caught = 0;
        for _ in 0..trials {
            let mut w = code.encode(&random_bits(&mut rng, 204)).unwrap();
            for p in sample(&mut rng, 220, 5) {
                w.flip(p);
            }
            if code.decode_limited(&w, 0).unwrap().1 == DecodeStatus::DetectedUncorrectable {
                caught += 1;
            }
        }
        assert!(caught as f64 / trials as f64 >= 0.99);
    }
}
