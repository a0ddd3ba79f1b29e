//! Seeded random streams.
//!
//! Every stochastic operation takes an explicit generator. Parallel work
//! (replicates, networks, counterfactual chains) derives one independent
//! stream per unit from a master seed, so results never depend on thread
//! scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type NetRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> NetRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for stream `index` under `master`. Streams with distinct
/// indices are independent ChaCha keystreams over the same key.
pub fn stream(master: u64, index: u64) -> NetRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng
}

/// Child seed for nested derivation (e.g. replicate -> network).
pub fn child_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index.wrapping_add(0x9E37_79B9_7F4A_7C15)))
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}
