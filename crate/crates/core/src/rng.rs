//! Deterministic random streams. Every consumer derives its generator from a
//! single `u64` seed plus a stream label, so results never depend on thread
//! scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// ChaCha8 generator keyed by `seed` and positioned on stream `stream`.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
