//! Seed derivation and per-stream generators.
//!
//! Every random object in the crate is drawn from a ChaCha8 generator keyed
//! by a 64-bit seed and addressed by a stream id (usually a sketch row or a
//! Monte Carlo trial). Streams are independent, so rows and trials can be
//! produced in any order, on any number of threads, with identical output.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use rand_chacha::ChaCha8Rng as StreamRng;

/// Stream ids at or above this value are reserved for operator-level draws
/// (SRHT sign diagonal, row subsets) so they never collide with row streams.
pub(crate) const AUX_STREAM_BASE: u64 = 1 << 62;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hashes a master seed together with a path of indices into a child seed.
///
/// `derive_seed(s, &[op, n_idx, trial])` is how sweep cells name their trials.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(master), |acc, &p| splitmix64(acc ^ splitmix64(p.wrapping_add(0x632B_E59B_D9B4_E019))))
}

/// Generator for stream `stream` under `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn derived_seeds_differ_by_path() {
        let a = derive_seed(7, &[0, 1, 2]);
        let b = derive_seed(7, &[0, 2, 1]);
        let c = derive_seed(8, &[0, 1, 2]);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, derive_seed(7, &[0, 1, 2]));
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let x: u64 = stream_rng(3, 5).random();
        let y: u64 = stream_rng(3, 5).random();
        let z: u64 = stream_rng(3, 6).random();
        assert_eq!(x, y);
        assert_ne!(x, z);
    }
}
