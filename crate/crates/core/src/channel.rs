//! Flat Rayleigh fading and AWGN: builds the received tensor from the coded
//! words of the active users.

use num_complex::Complex64;
use rand::Rng;

use crate::codec::Bits;
use crate::error::{invalid, Result};
use crate::link::LinkParams;
use crate::rng::{complex_gaussian, substream, Stream};
use crate::tensor::{synthesize_received, BlockTerm, BtdModel, ComplexTensor3};

/// Per-trial channel settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelConfig {
    /// Receive antennas.
    pub n: usize,
    /// Active users.
    pub k: usize,
    /// Per-bit SNR in dB; `f64::INFINITY` gives a noiseless channel.
    pub ebn0_db: f64,
    /// Transmit energy `‖s_k‖_F²` of every user.
    pub es: f64,
    pub seed: u64,
}

impl ChannelConfig {
    /// Unit average power per channel use (`E_s = T1·T2`).
    pub fn for_link(link: &LinkParams, n: usize, k: usize, ebn0_db: f64, seed: u64) -> Self {
        Self { n, k, ebn0_db, es: link.channel_uses() as f64, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.k == 0 {
            return invalid("N and K must be at least 1");
        }
        if self.es <= 0.0 || !self.es.is_finite() {
            return invalid("E_s must be positive and finite");
        }
        if self.ebn0_db.is_nan() || self.ebn0_db == f64::NEG_INFINITY {
            return invalid("Eb/N0 must be a number below +inf dB");
        }
        Ok(())
    }
}

/// A received tensor with the terms that produced it.
#[derive(Debug, Clone)]
pub struct Transmission {
    pub y: ComplexTensor3,
    pub ground_truth: BtdModel,
    /// Noise standard deviation per complex entry.
    pub sigma: f64,
}

/// `k` channel vectors of length `n` with i.i.d. standard complex Gaussian
/// entries.
pub fn sample_channels<R: Rng + ?Sized>(k: usize, n: usize, rng: &mut R) -> Vec<Vec<Complex64>> {
    (0..k).map(|_| (0..n).map(|_| complex_gaussian(rng)).collect()).collect()
}

/// Noise standard deviation per complex entry for energy per bit
/// `E_b = E_s/B0`: `σ² = N0 = E_b / 10^(ebn0_db/10)`.
pub fn noise_sigma(ebn0_db: f64, es: f64, b0: usize) -> f64 {
    let eb = es / b0 as f64;
    (eb / 10f64.powf(ebn0_db / 10.0)).sqrt()
}

/// Complex AWGN tensor with total variance `σ²` per entry.
pub fn sample_noise<R: Rng + ?Sized>(dims: (usize, usize, usize), sigma: f64, rng: &mut R) -> ComplexTensor3 {
    ComplexTensor3::from_fn(dims, |_, _, _| complex_gaussian(rng) * sigma)
}

/// Modulate every coded word, scale it to energy `E_s`, pass it through an
/// independent Rayleigh channel and add noise.
pub fn transmit(coded: &[Bits], link: &LinkParams, config: &ChannelConfig) -> Result<Transmission> {
    config.validate()?;
    if coded.len() != config.k {
        return invalid(format!("expected {} coded words, got {}", config.k, coded.len()));
    }
    let amplitude = Complex64::new((config.es / link.l() as f64).sqrt(), 0.0);
    let mut channel_rng = substream(config.seed, Stream::Channels);
    let channels = sample_channels(config.k, config.n, &mut channel_rng);
    let terms = coded
        .iter()
        .zip(channels)
        .map(|(word, h)| {
            let (a, b) = link.symbols(word)?;
            BlockTerm::new(a.into_matrix() * amplitude, b.into_matrix(), h)
        })
        .collect::<Result<Vec<_>>>()?;
    let ground_truth = BtdModel::new(terms)?;
    let dims = (link.t1(), link.t2(), config.n);
    let sigma = noise_sigma(config.ebn0_db, config.es, link.payload_bits());
    let y = if sigma > 0.0 {
        let noise = sample_noise(dims, sigma, &mut substream(config.seed, Stream::Noise));
        synthesize_received(&ground_truth, Some(&noise))?
    } else {
        synthesize_received(&ground_truth, None)?
    };
    Ok(Transmission { y, ground_truth, sigma })
}
