//! Random-number plumbing.
//!
//! Every stochastic routine in this crate draws from a caller-supplied
//! [`RngCore`]. The reference generator is xoshiro256++ ([`StdGen`]), seeded
//! through SplitMix64 by [`seeded`]. Independent trials use substreams whose
//! seeds are derived with [`substream_seed`], so that a trial can be re-run in
//! isolation from its seed alone.
//!
//! Uniform variates take the top 53 bits of a `u64`; normal variates come from
//! the Box–Muller transform. Both are written out here so the random streams
//! do not depend on the internals of any distribution crate.

use core::f64::consts::PI;

pub use rand_core::{RngCore, SeedableRng};
pub use rand_xoshiro::Xoshiro256PlusPlus as StdGen;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a substream seed from a master seed and a key path
/// (for example `[experiment, d, n, trial]`).
pub fn substream_seed(master: u64, keys: &[u64]) -> u64 {
    keys.iter().fold(mix64(master ^ GOLDEN), |h, &k| {
        mix64(h ^ mix64(k.wrapping_add(GOLDEN)))
    })
}

/// xoshiro256++ seeded from a single `u64`.
pub fn seeded(seed: u64) -> StdGen {
    StdGen::seed_from_u64(seed)
}

/// Uniform on `[0, 1)` with 53 bits of resolution.
#[inline]
pub fn unit_f64<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform on `[-half_width, half_width)`.
#[inline]
pub fn symmetric_uniform<R: RngCore + ?Sized>(rng: &mut R, half_width: f64) -> f64 {
    (2.0 * unit_f64(rng) - 1.0) * half_width
}

/// One Box–Muller pair of independent standard normals.
#[inline]
pub fn normal_pair<R: RngCore + ?Sized>(rng: &mut R) -> (f64, f64) {
    // 1 - U lies in (0, 1], keeping the logarithm finite.
    let u1 = 1.0 - unit_f64(rng);
    let u2 = unit_f64(rng);
    let r = libm::sqrt(-2.0 * libm::log(u1));
    let theta = 2.0 * PI * u2;
    (r * libm::cos(theta), r * libm::sin(theta))
}

/// A single standard normal (the second Box–Muller value is discarded).
#[inline]
pub fn standard_normal<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    normal_pair(rng).0
}

/// Fill `out` with i.i.d. standard normals, consuming pairs in order.
pub fn fill_standard_normal<R: RngCore + ?Sized>(rng: &mut R, out: &mut [f64]) {
    let mut chunks = out.chunks_exact_mut(2);
    for pair in &mut chunks {
        let (a, b) = normal_pair(rng);
        pair[0] = a;
        pair[1] = b;
    }
    if let [last] = chunks.into_remainder() {
        *last = standard_normal(rng);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_range() {
        let mut rng = seeded(1);
        for _ in 0..10_000 {
            let u = unit_f64(&mut rng);
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn substreams_differ_and_repeat() {
        let a = substream_seed(7, &[1, 2, 3]);
        let b = substream_seed(7, &[1, 2, 4]);
        let c = substream_seed(7, &[1, 2, 3]);
        assert_ne!(a, b);
        assert_eq!(a, c);
        assert_ne!(substream_seed(7, &[]), substream_seed(8, &[]));
    }

    #[test]
    fn normal_moments() {
        let mut rng = seeded(42);
        let mut buf = [0.0; 200_001];
        fill_standard_normal(&mut rng, &mut buf);
        let n = buf.len() as f64;
        let mean = buf.iter().sum::<f64>() / n;
        let var = buf.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        assert!(mean.abs() < 5.0 / n.sqrt());
        assert!((var - 1.0).abs() < 5.0 * (2.0 / n).sqrt());
    }
}
