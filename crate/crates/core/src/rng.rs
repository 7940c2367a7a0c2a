//! Seeded random streams.
//!
//! Every random choice in the crate comes from a ChaCha8 stream keyed by the
//! master seed and selected by a 64-bit stream identifier, so independent
//! pieces of work can be generated in any order or in parallel.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

const SAMPLING_TAG: u64 = 1 << 63;

/// Stream for the matching of `copy` at `level`.
pub fn matching_stream(seed: u64, level: u32, copy: u64) -> StreamRng {
    debug_assert!(copy < 1 << 32);
    stream(seed, (u64::from(level) << 32) | copy)
}

/// Stream for sampling work (pair selection, sources) tagged by `purpose`.
///
/// Tagged identifiers never collide with matching streams.
pub fn sampling_stream(seed: u64, purpose: u64) -> StreamRng {
    stream(seed, SAMPLING_TAG | purpose)
}

fn stream(seed: u64, id: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Purpose tags for [`sampling_stream`].
pub mod purpose {
    pub const DIAMETER_SOURCES: u64 = 1;
    pub const DIAMETER_PAIRS: u64 = 2;
    pub const ROUTE_PAIRS: u64 = 3;
    pub const VERIFY_VERTICES: u64 = 4;
    pub const QUASI_PAIRS: u64 = 5;
}
