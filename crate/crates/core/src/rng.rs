//! Splittable, counter-based randomness.
//!
//! Every sampler in this crate draws from a ChaCha generator keyed by a
//! `(seed, stream_id)` pair, so replications and parallel candidate tests are
//! reproducible independently of scheduling. Seeds for sub-experiments are
//! derived with SplitMix64 so that one master seed fans out deterministically.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One SplitMix64 step; advances `state` and returns the next word.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from a master seed and a label (replication index,
/// experiment tag, candidate index, ...).
pub fn derive_seed(master: u64, label: u64) -> u64 {
    let mut state = master ^ 0xA0761D6478BD642F_u64.wrapping_mul(label.wrapping_add(1));
    let a = splitmix64(&mut state);
    let b = splitmix64(&mut state);
    a ^ b.rotate_left(32)
}

/// Counter-based generator keyed by `(seed, stream_id)`.
///
/// Distinct stream ids under the same seed yield independent streams; the
/// ChaCha block counter supplies the per-draw index.
pub fn stream_rng(seed: u64, stream_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

/// Uniform draw on the open interval (0, 1), 53-bit resolution.
///
/// Strictly positive so it can feed logarithms directly.
#[inline]
pub fn next_open01<R: RngCore>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Uniform draw on the half-open interval [0, 1).
#[inline]
pub fn next_unit<R: RngCore>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// FNV-1a over a byte slice; used for configuration fingerprints.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xCBF2_9CE4_8422_2325_u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01B3);
    }
    hash
}
