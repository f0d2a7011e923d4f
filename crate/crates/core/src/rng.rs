//! Seeded random source shared by every generator in the crate.
//!
//! The stream is fully specified so it can be reproduced outside Rust:
//!
//! 1. **State seeding.** The 64-bit seed drives SplitMix64
//!    (`x += 0x9E3779B97F4A7C15; z = x; z = (z ^ z>>30) * 0xBF58476D1CE4E5B9;
//!    z = (z ^ z>>27) * 0x94D049BB133111EB; z ^ z>>31`); its first four
//!    outputs form the xoshiro256++ state `s[0..4]`.
//! 2. **Raw draws.** xoshiro256++ `next_u64`:
//!    `r = rotl(s0 + s3, 23) + s0; t = s1 << 17; s2 ^= s0; s3 ^= s1;
//!    s1 ^= s2; s0 ^= s3; s2 ^= t; s3 = rotl(s3, 45)`.
//! 3. **Uniform in [0, 1).** `(next_u64 >> 11) * 2^-53`.
//! 4. **Standard normal pair.** Box–Muller on two uniforms `u1, u2`:
//!    `r = sqrt(-2 ln(1 - u1))`, `(r cos 2πu2, r sin 2πu2)`. Both values of
//!    the pair are used, first the cosine branch.
//! 5. **Sub-seeds.** [`derive_seed`] maps `(master, stream)` to
//!    `splitmix64_mix(master + 0x9E3779B97F4A7C15 * (stream + 1))` with
//!    wrapping arithmetic, where `splitmix64_mix` is the output function of
//!    step 1 without the increment.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output mixing function.
pub fn splitmix64_mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent sub-seed for a numbered stream under a master seed.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    splitmix64_mix(master.wrapping_add(GOLDEN_GAMMA.wrapping_mul(stream.wrapping_add(1))))
}

#[derive(Clone, Debug)]
pub struct Rng {
    inner: Xoshiro256PlusPlus,
    spare_normal: Option<f64>,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: Xoshiro256PlusPlus::seed_from_u64(seed),
            spare_normal: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform draw in `[0, 1)` with 53 bits of precision.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal draw (Box–Muller, pairs consumed in order).
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * (1.0 - u1).ln()).sqrt();
        let phi = std::f64::consts::TAU * u2;
        self.spare_normal = Some(r * phi.sin());
        r * phi.cos()
    }

    /// Uniform phase in `[0, 2π)`.
    pub fn phase(&mut self) -> f64 {
        std::f64::consts::TAU * self.uniform()
    }
}
