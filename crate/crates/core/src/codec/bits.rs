use std::fmt;

use crate::error::{invalid, Result};

/// An owned bit string, most-significant bit first.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Bits(Vec<bool>);

impl Bits {
    pub fn new(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![false; len])
    }

    /// The low `len` bits of `value`, most significant first.
    pub fn from_uint(value: u64, len: usize) -> Self {
        Self((0..len).rev().map(|k| k < 64 && (value >> k) & 1 == 1).collect())
    }

    /// Parse a left-aligned hex string into `len` bits. Padding bits past
    /// `len` in the last digit must be zero.
    pub fn from_hex(hex: &str, len: usize) -> Result<Self> {
        let hex = hex.trim().trim_start_matches("0x");
        if hex.len() * 4 < len || hex.len() > len.div_ceil(4).max(1) {
            return invalid(format!(
                "{} hex digits cannot hold exactly {len} bits",
                hex.len()
            ));
        }
        let mut bits = Vec::with_capacity(hex.len() * 4);
        for ch in hex.chars() {
            let d = match ch.to_digit(16) {
                Some(d) => d,
                None => return invalid(format!("'{ch}' is not a hex digit")),
            };
            bits.extend((0..4).rev().map(|k| (d >> k) & 1 == 1));
        }
        if bits[len..].iter().any(|&b| b) {
            return invalid("nonzero padding bits after the payload");
        }
        bits.truncate(len);
        Ok(Self(bits))
    }

    /// Left-aligned hex rendering (zero padded to whole digits).
    pub fn to_hex(&self) -> String {
        self.0
            .chunks(4)
            .map(|chunk| {
                let d = chunk
                    .iter()
                    .enumerate()
                    .fold(0u32, |acc, (k, &b)| acc | (u32::from(b) << (3 - k)));
                char::from_digit(d, 16).unwrap()
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<bool> {
        self.0
    }

    pub fn slice(&self, start: usize, end: usize) -> Self {
        Self(self.0[start..end].to_vec())
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Self(v)
    }

    /// Unsigned integer value of `bits[start..end]`, MSB first.
    pub fn uint(&self, start: usize, end: usize) -> u64 {
        debug_assert!(end - start <= 64);
        self.0[start..end]
            .iter()
            .fold(0u64, |acc, &b| (acc << 1) | u64::from(b))
    }

    pub fn xor(&self, other: &Self) -> Self {
        assert_eq!(self.len(), other.len());
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a ^ b).collect())
    }

    pub fn flip(&mut self, index: usize) {
        self.0[index] = !self.0[index];
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bits[{}; ", self.len())?;
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        f.write_str("]")
    }
}

impl From<Vec<bool>> for Bits {
    fn from(v: Vec<bool>) -> Self {
        Self(v)
    }
}
