//! Deterministic seeding. Every Monte Carlo loop derives one sub-seed per
//! sample index from the master seed with a counter-based mix, so results do
//! not depend on worker count or iteration order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// SplitMix64 finalizer; good avalanche for counter-based derivation.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Sub-seed for sample `index` within stream `stream` of a run.
pub fn derive_seed(master: u64, stream: u64, index: u64) -> u64 {
    mix(mix(master ^ mix(stream)) ^ index.wrapping_mul(0xd134_2543_de82_ef95))
}

pub fn rng_from_seed(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Per-index RNG: deterministic regardless of how indices are distributed
/// across workers.
pub fn rng_for(master: u64, stream: u64, index: u64) -> ChaCha12Rng {
    rng_from_seed(derive_seed(master, stream, index))
}
