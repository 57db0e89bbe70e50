//! Cube-split mapping of bit pairs onto points inside the unit disc.
//!
//! A pair of part values `(x_re, x_im)` with bit lengths `(L_re, L_im)` is
//! first sent to the Gaussian quantile point
//!
//! ```text
//! ω = Φ⁻¹((2·x_re + 1) / 2^(L_re+1)) + j·Φ⁻¹((2·x_im + 1) / 2^(L_im+1))
//! ```
//!
//! and then squeezed radially into the open unit disc,
//! `α = sqrt((1 − e^(−|ω|²/2)) / (1 + e^(−|ω|²/2))) · ω/|ω|`.
//! Since `(1 − e^(−u))/(1 + e^(−u)) = tanh(u/2)` the radial law is
//! `|α|² = tanh(|ω|²/4)`, which inverts as `|ω|² = 4·atanh(|α|²)`.

use num_complex::Complex64;
use statrs::function::erf::erfc;

use crate::error::{invalid, Result};

/// Largest supported part length in bits.
pub const MAX_PART_BITS: usize = 20;

/// Estimates on or outside the unit circle are pulled back to this radius.
pub const CLAMP_RADIUS: f64 = 1.0 - 1e-9;

/// Standard normal quantile: Acklam's rational approximation polished by
/// one Halley step on `Φ`, accurate to a few ulps over (0, 1).
fn quantile(prob: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const LOW: f64 = 0.024_25;
    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let x = if prob < LOW {
        tail((-2.0 * prob.ln()).sqrt())
    } else if prob <= 1.0 - LOW {
        let q = prob - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -tail((-2.0 * (1.0 - prob).ln()).sqrt())
    };
    // Halley refinement
    let e = cdf(x) - prob;
    let u = e * (2.0 * std::f64::consts::PI).sqrt() * (x * x / 2.0).exp();
    x - u / (1.0 + x * u / 2.0)
}

fn cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

fn cell_center(x: u64, bits: usize) -> Result<f64> {
    if bits > MAX_PART_BITS {
        return invalid(format!("part length {bits} exceeds {MAX_PART_BITS} bits"));
    }
    if x >> bits != 0 {
        return invalid(format!("value {x} does not fit in {bits} bits"));
    }
    let denom = (1u64 << (bits + 1)) as f64;
    Ok(quantile((2 * x + 1) as f64 / denom))
}

/// Map `(x_re, x_im)` to a point strictly inside the unit disc.
pub fn cube_split_scalar(x_re: u64, x_im: u64, bits_re: usize, bits_im: usize) -> Result<Complex64> {
    let omega = Complex64::new(cell_center(x_re, bits_re)?, cell_center(x_im, bits_im)?);
    Ok(radial_squeeze(omega))
}

fn radial_squeeze(omega: Complex64) -> Complex64 {
    let r2 = omega.norm_sqr();
    if r2 == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let radius = (r2 / 4.0).tanh().sqrt();
    omega * (radius / r2.sqrt())
}

fn radial_unsqueeze(alpha: Complex64) -> Complex64 {
    let mut r = alpha.norm();
    if !r.is_finite() {
        return Complex64::new(0.0, 0.0);
    }
    if r == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let dir = alpha / r;
    if r >= 1.0 {
        r = CLAMP_RADIUS;
    }
    let omega_norm = (4.0 * (r * r).atanh()).sqrt();
    dir * omega_norm
}

fn quantize(value: f64, bits: usize) -> u64 {
    let levels = 1u64 << bits;
    let cell = (cdf(value) * levels as f64).floor();
    (cell.max(0.0) as u64).min(levels - 1)
}

/// Hard decision back to `(x_re, x_im)`: the cube-split cell containing
/// `alpha`. Points with `|α| ≥ 1` are radially clamped first.
pub fn inverse_cube_split(alpha: Complex64, bits_re: usize, bits_im: usize) -> Result<(u64, u64)> {
    if bits_re > MAX_PART_BITS || bits_im > MAX_PART_BITS {
        return invalid(format!("part lengths above {MAX_PART_BITS} bits are unsupported"));
    }
    let omega = radial_unsqueeze(alpha);
    Ok((quantize(omega.re, bits_re), quantize(omega.im, bits_im)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ContinuousCDF, Normal};

    // Independent quantile: bisection on Φ(x) = erfc(−x/√2)/2.
    fn bisect_quantile(p: f64) -> f64 {
        let (mut lo, mut hi) = (-40.0f64, 40.0f64);
        let normal = Normal::standard();
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if normal.cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    // Direct evaluation of the radial map in its exponential form.
    fn oracle_alpha(x_re: u64, x_im: u64, l_re: u32, l_im: u32) -> Complex64 {
        let w = Complex64::new(
            bisect_quantile((2 * x_re + 1) as f64 / 2f64.powi(l_re as i32 + 1)),
            bisect_quantile((2 * x_im + 1) as f64 / 2f64.powi(l_im as i32 + 1)),
        );
        let e = (-w.norm_sqr() / 2.0).exp();
        w / w.norm() * ((1.0 - e) / (1.0 + e)).sqrt()
    }

    #[test]
    fn one_bit_origin_cell_matches_oracle() {
        let got = cube_split_scalar(0, 0, 1, 1).unwrap();
        let want = oracle_alpha(0, 0, 1, 1);
        assert!((got - want).norm() < 1e-12);
        // frozen from the oracle: Φ⁻¹(0.25) = −0.674489750196…
        assert!((bisect_quantile(0.25) + 0.674_489_750_196_081_7).abs() < 1e-12);
        assert!((got.re - -0.334_383_417_241_482_7).abs() < 1e-9, "{got}");
        assert!((got.re - got.im).abs() < 1e-15);
    }

    #[test]
    fn opposite_cell_is_negation() {
        let a = cube_split_scalar(0, 0, 1, 1).unwrap();
        let b = cube_split_scalar(1, 1, 1, 1).unwrap();
        assert!((a + b).norm() < 1e-15);
    }

    #[test]
    fn oracle_agreement_and_open_disc() {
        for (lr, li) in [(1, 2), (2, 2), (3, 1), (3, 3), (8, 8)] {
            for xr in 0..(1u64 << lr) {
                for xi in 0..(1u64 << li) {
                    let a = cube_split_scalar(xr, xi, lr, li).unwrap();
                    assert!(a.norm() < 1.0);
                    if lr <= 3 && li <= 3 {
                        let o = oracle_alpha(xr, xi, lr as u32, li as u32);
                        assert!((a - o).norm() < 1e-12, "{xr} {xi} {lr} {li} {}", (a - o).norm());
                    }
                }
            }
        }
    }

    #[test]
    fn out_of_range_values_rejected() {
        assert!(cube_split_scalar(2, 0, 1, 1).is_err());
        assert!(cube_split_scalar(0, 4, 1, 2).is_err());
        assert!(cube_split_scalar(0, 0, 21, 1).is_err());
    }

    #[test]
    fn quantile_accuracy() {
        for k in 1..2000 {
            let p = k as f64 / 2000.0;
            assert!((quantile(p) - bisect_quantile(p)).abs() < 1e-13, "p = {p}");
        }
        for p in [1e-12, 1e-6, 0.01, 0.99, 1.0 - 1e-6] {
            assert!((quantile(p) - bisect_quantile(p)).abs() < 1e-10, "p = {p}");
        }
    }

    #[test]
    fn zero_length_parts_map_to_axes() {
        let a = cube_split_scalar(0, 0, 0, 0).unwrap();
        assert_eq!(a, Complex64::new(0.0, 0.0));
        assert_eq!(inverse_cube_split(a, 0, 0).unwrap(), (0, 0));
        let b = cube_split_scalar(1, 0, 1, 0).unwrap();
        assert!(b.im.abs() < 1e-15 && b.re > 0.0);
        assert_eq!(inverse_cube_split(b, 1, 0).unwrap(), (1, 0));
    }

    #[test]
    fn roundtrip_small_lengths() {
        for lr in 0..=3 {
            for li in 0..=3 {
                for xr in 0..(1u64 << lr) {
                    for xi in 0..(1u64 << li) {
                        let a = cube_split_scalar(xr, xi, lr, li).unwrap();
                        assert_eq!(inverse_cube_split(a, lr, li).unwrap(), (xr, xi));
                    }
                }
            }
        }
    }

    // Exhaustive cell oracle: the cell of ω is the index k with
    // k/2^L ≤ Φ(ω) < (k+1)/2^L, found by scanning boundaries.
    fn cell_by_scan(v: f64, bits: usize) -> u64 {
        let levels = 1u64 << bits;
        (0..levels)
            .rev()
            .find(|&k| k == 0 || v >= bisect_quantile(k as f64 / levels as f64))
            .unwrap()
    }

    #[test]
    fn perturbed_points_stay_in_cell() {
        let a = cube_split_scalar(0, 0, 1, 1).unwrap();
        for d in [
            Complex64::new(1e-3, 0.0),
            Complex64::new(0.0, -1e-3),
            Complex64::new(-7e-4, 7e-4),
        ] {
            assert_eq!(inverse_cube_split(a + d, 1, 1).unwrap(), (0, 0));
        }
        // 0.999 along the direction of a cell centre: quadrant cells keep
        // their label, inner cells of longer parts follow the scan oracle
        for xr in 0..2u64 {
            for xi in 0..2u64 {
                let c = cube_split_scalar(xr, xi, 1, 1).unwrap();
                assert_eq!(inverse_cube_split(c / c.norm() * 0.999, 1, 1).unwrap(), (xr, xi));
            }
        }
        for xr in 0..4u64 {
            for xi in 0..4u64 {
                let c = cube_split_scalar(xr, xi, 2, 2).unwrap();
                let p = c / c.norm() * 0.999;
                let w = radial_unsqueeze(p);
                let want = (cell_by_scan(w.re, 2), cell_by_scan(w.im, 2));
                assert_eq!(inverse_cube_split(p, 2, 2).unwrap(), want);
                if (xr == 0 || xr == 3) && (xi == 0 || xi == 3) {
                    assert_eq!(want, (xr, xi));
                }
            }
        }
    }

    #[test]
    fn clamps_outside_the_disc() {
        let a = cube_split_scalar(3, 0, 2, 2).unwrap();
        let outside = a / a.norm() * 1.5;
        let (xr, xi) = inverse_cube_split(outside, 2, 2).unwrap();
        assert_eq!((xr, xi), (3, 0));
        assert!(inverse_cube_split(Complex64::new(f64::NAN, 0.0), 2, 2).is_ok());
    }
}
