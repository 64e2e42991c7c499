//! Counter-based random streams.
//!
//! A draw is a pure function of `(seed, stream, keys...)`, so agents can be
//! evaluated in any order (or in parallel) and still see the same numbers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Subsystem identifiers. Values are part of the reproducibility contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Population = 1,
    TailImputation = 2,
    Firms = 3,
    Network = 4,
    Adoption = 5,
    SampleData = 6,
    Consumption = 7,
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a seed, a stream id and a key sequence into one 64-bit word.
pub fn mix(seed: u64, stream: Stream, keys: &[u64]) -> u64 {
    let mut h = splitmix64(seed ^ splitmix64(stream as u64));
    for &k in keys {
        h = splitmix64(h ^ k.wrapping_mul(GOLDEN));
    }
    h
}

/// Uniform draw in [0, 1) keyed by `(seed, stream, keys)`.
pub fn uniform(seed: u64, stream: Stream, keys: &[u64]) -> f64 {
    (mix(seed, stream, keys) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// A sequential generator for setup work (sampling, graph construction).
pub fn generator(seed: u64, stream: Stream, keys: &[u64]) -> ChaCha8Rng {
    let word = mix(seed, stream, keys);
    let mut bytes = [0u8; 32];
    for (i, chunk) in bytes.chunks_mut(8).enumerate() {
        chunk.copy_from_slice(&splitmix64(word.wrapping_add(i as u64)).to_le_bytes());
    }
    ChaCha8Rng::from_seed(bytes)
}
