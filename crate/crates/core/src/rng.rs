//! Counter-based random streams.
//!
//! Every random draw in the library is keyed by `(seed, stream)`: the seed
//! identifies a replicate and the stream separates independent purposes
//! (field noise, Brownian increments, harmonic-measure walkers, ...). The
//! generator for a key does not depend on scheduling, so parallel and
//! sequential executions produce identical numbers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream identifiers used by the library.
pub mod streams {
    pub const FIELD: u64 = 1;
    pub const PATH: u64 = 2;
    pub const WALKERS: u64 = 3;
    pub const EXPONENT: u64 = 4;
    pub const NOISE: u64 = 5;
}

/// SplitMix64 finaliser, used to spread nearby seeds over the key space.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for `(seed, stream)`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let a = mix(seed);
    let b = mix(a ^ 0x5851_F42D_4C95_7F2D);
    let c = mix(b ^ seed.rotate_left(17));
    let d = mix(c ^ 0x1405_7B7E_F767_814F);
    for (chunk, word) in key.chunks_exact_mut(8).zip([a, b, c, d]) {
        chunk.copy_from_slice(&word.to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream);
    rng
}

/// Generator for sub-task `index` of `(seed, stream)`, e.g. one walker batch.
pub fn substream_rng(seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    stream_rng(mix(seed ^ mix(index.wrapping_add(0xA076_1D64_78BD_642F))), stream)
}
