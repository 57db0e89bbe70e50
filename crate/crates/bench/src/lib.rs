//! Fixtures shared by the benchmarks.

use btdm_core::rng::complex_gaussian;
use btdm_core::tensor::{synthesize_received, BlockTerm, BtdModel};
use btdm_core::{Bits, CMatrix, ComplexTensor3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Noiseless tensor of `k` random rank-`(l, l, 1)` terms.
pub fn random_tensor(dims: (usize, usize, usize), k: usize, l: usize, seed: u64) -> ComplexTensor3 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = |r: usize, c: usize| CMatrix::from_fn(r, c, |_, _| complex_gaussian(&mut rng));
    let terms = (0..k)
        .map(|_| {
            let (a, b) = (g(dims.0, l), g(dims.1, l));
            BlockTerm::new(a, b, g(dims.2, 1).iter().copied().collect()).expect("full-rank factors")
        })
        .collect();
    synthesize_received(&BtdModel::new(terms).expect("consistent terms"), None).expect("valid model")
}

pub fn random_bits(len: usize, seed: u64) -> Bits {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Bits::new((0..len).map(|_| rng.random()).collect())
}
