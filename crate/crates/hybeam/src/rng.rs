//! Seeded random draws shared by the channel generator, the designers and
//! network training.
//!
//! Reproducibility contract: every stream is a ChaCha8 generator seeded
//! through [`substream`], and every distribution below is built from raw
//! 64-bit words with the documented transforms. Two runs with the same seeds
//! therefore produce bit-identical draws regardless of thread count or
//! platform.

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// SplitMix64 finalizer; bijective on u64.
fn mix(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^= z >> 31;
    z
}

/// Derives the seed of an independent substream from a base seed and an
/// index. For a fixed base seed, distinct indices map to distinct seeds, so
/// per-index streams can be generated in any order (or in parallel) with
/// identical results.
pub fn substream_seed(seed: u64, index: u64) -> u64 {
    mix(seed ^ mix(index.wrapping_add(0x9e37_79b9_7f4a_7c15)))
}

/// Independent ChaCha8 stream for `(seed, index)`.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(substream_seed(seed, index))
}

/// Uniform draw in `[0, 1)` using the top 53 bits of one word.
pub fn uniform_f64(stream: &mut ChaCha8Rng) -> f64 {
    (stream.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform draw strictly inside `(0, 1)`.
fn uniform_open(stream: &mut ChaCha8Rng) -> f64 {
    ((stream.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Uniform angle in `[0, 2*pi)`.
pub fn uniform_angle(stream: &mut ChaCha8Rng) -> f64 {
    std::f64::consts::TAU * uniform_f64(stream)
}

/// Uniform index in `[0, n)` by scaling one 53-bit draw.
pub fn uniform_index(stream: &mut ChaCha8Rng, n: usize) -> usize {
    ((uniform_f64(stream) * n as f64) as usize).min(n - 1)
}

/// Zero-mean Laplacian draw with scale `b`, by inverse CDF on one uniform.
pub fn laplace(stream: &mut ChaCha8Rng, b: f64) -> f64 {
    let u = uniform_open(stream);
    if u < 0.5 {
        b * (2.0 * u).ln()
    } else {
        -b * (2.0 * (1.0 - u)).ln()
    }
}

/// Standard normal pair via Box-Muller on two uniforms.
pub fn standard_normal_pair(stream: &mut ChaCha8Rng) -> (f64, f64) {
    let u1 = uniform_open(stream);
    let u2 = uniform_f64(stream);
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = std::f64::consts::TAU * u2;
    (r * theta.cos(), r * theta.sin())
}

/// Circularly symmetric complex Gaussian with unit variance: independent
/// real and imaginary normals of variance 1/2 each.
pub fn complex_standard_normal(stream: &mut ChaCha8Rng) -> Complex64 {
    let (re, im) = standard_normal_pair(stream);
    Complex64::new(re, im).scale(std::f64::consts::FRAC_1_SQRT_2)
}

/// Bernoulli draw with success probability `p`.
pub fn bernoulli(stream: &mut ChaCha8Rng, p: f64) -> bool {
    uniform_f64(stream) < p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substreams_are_deterministic_and_index_dependent() {
        let mut a = substream(42, 7);
        let mut b = substream(42, 7);
        assert_eq!(a.next_u64(), b.next_u64());
        let mut c = substream(42, 8);
        let mut d = substream(42, 7);
        d.next_u64();
        assert_ne!(c.next_u64(), d.next_u64());
    }

    #[test]
    fn uniform_respects_range() {
        let mut s = substream(1, 0);
        for _ in 0..1000 {
            let u = uniform_f64(&mut s);
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn laplace_std_matches_scale() {
        // Var = 2 b^2, so std = b * sqrt(2).
        let mut s = substream(3, 0);
        let b = 0.25;
        let n = 100_000;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n {
            let x = laplace(&mut s, b);
            sum += x;
            sumsq += x * x;
        }
        let mean = sum / n as f64;
        let std = (sumsq / n as f64 - mean * mean).sqrt();
        let expected = b * std::f64::consts::SQRT_2;
        assert!((std - expected).abs() / expected < 0.03);
    }

    #[test]
    fn complex_normal_is_unit_variance() {
        let mut s = substream(9, 0);
        let n = 100_000;
        let mut power = 0.0;
        for _ in 0..n {
            power += complex_standard_normal(&mut s).norm_sqr();
        }
        assert!((power / n as f64 - 1.0).abs() < 0.02);
    }
}
