//! Seeded, splittable random streams.
//!
//! Every unit of parallel work (a bootstrap replicate, a sweep cell
//! repetition) owns a ChaCha8 stream chosen from its index, so results do
//! not depend on how rayon schedules the work.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator type used throughout the crate.
pub type StreamRng = ChaCha8Rng;

/// Returns the generator for `stream` under `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Folds a multi-part index (cell, repetition, ...) into one stream id.
pub fn stream_id(parts: &[u64]) -> u64 {
    parts.iter().fold(0x243f_6a88_85a3_08d3, |acc, &p| {
        splitmix64(acc ^ splitmix64(p.wrapping_add(0x9e37_79b9_7f4a_7c15)))
    })
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
