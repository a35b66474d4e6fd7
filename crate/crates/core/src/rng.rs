//! Deterministic random streams.
//!
//! Every stream is a ChaCha8 generator keyed by the run seed, with the
//! 64-bit stream id derived from a list of integer keys (experiment tag,
//! scale, trial index, ...) through SplitMix64 mixing. ChaCha is counter
//! based, so a stream depends only on `(seed, keys)` and never on the order
//! in which other streams were consumed.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

pub type LabRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream id for a key list.
pub fn stream_id(keys: &[u64]) -> u64 {
    keys.iter().fold(0x5EED_0F_57_2EA4u64, |acc, &k| {
        splitmix64(acc ^ splitmix64(k))
    })
}

/// Generator for `(seed, keys)`.
pub fn stream(seed: u64, keys: &[u64]) -> LabRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(keys));
    rng
}

/// Standard normal deviate by Box-Muller (one of the pair is discarded so
/// the stream position advances by exactly two uniforms per call).
pub fn normal(rng: &mut LabRng) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Complex Gaussian with `E|z|^2 = 1`.
pub fn complex_normal(rng: &mut LabRng) -> Complex64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Complex64::new(s * normal(rng), s * normal(rng))
}

pub fn uniform(rng: &mut LabRng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.gen::<f64>()
}

/// Key for a floating-point parameter such as a frequency scale.
pub fn f64_key(x: f64) -> u64 {
    x.to_bits()
}
