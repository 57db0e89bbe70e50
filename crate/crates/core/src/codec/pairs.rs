//! Lexicographic injection of integers into dominant-row pairs.
//!
//! Rows are 0-based: index 0 is `(0, 1)`, index 1 is `(0, 2)`, …, index
//! `T − 2` is `(0, T − 1)`, then `(1, 2)` and so on.

use crate::error::{invalid, Result};

pub fn pair_count(t: usize) -> usize {
    t * t.saturating_sub(1) / 2
}

/// The `index`-th pair `(p, q)`, `p < q < t`, in lexicographic order.
pub fn pair_from_index(index: u64, t: usize) -> Result<(usize, usize)> {
    if (index as usize) >= pair_count(t) {
        return invalid(format!("pair index {index} out of range for T = {t}"));
    }
    let mut rem = index as usize;
    for p in 0..t - 1 {
        let row = t - 1 - p;
        if rem < row {
            return Ok((p, p + 1 + rem));
        }
        rem -= row;
    }
    unreachable!("index checked against pair_count")
}

/// Inverse of [`pair_from_index`].
pub fn index_from_pair(p: usize, q: usize, t: usize) -> Result<u64> {
    if !(p < q && q < t) {
        return invalid(format!("({p}, {q}) is not an ordered pair below T = {t}"));
    }
    let before: usize = (0..p).map(|r| t - 1 - r).sum();
    Ok((before + q - p - 1) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t4_enumeration() {
        let want = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        for (i, &pq) in want.iter().enumerate() {
            assert_eq!(pair_from_index(i as u64, 4).unwrap(), pq);
            assert_eq!(index_from_pair(pq.0, pq.1, 4).unwrap(), i as u64);
        }
        assert!(pair_from_index(6, 4).is_err());
        assert!(index_from_pair(2, 2, 4).is_err());
        assert!(index_from_pair(1, 4, 4).is_err());
    }

    #[test]
    fn t30_first_pair_and_roundtrip() {
        assert_eq!(pair_from_index(0, 30).unwrap(), (0, 1));
        for idx in 0..256u64 {
            let (p, q) = pair_from_index(idx, 30).unwrap();
            assert_eq!(index_from_pair(p, q, 30).unwrap(), idx);
        }
    }
}
