//! Per-scenario random streams.
//!
//! Every scenario draws from its own ChaCha8 stream keyed by
//! `(seed, scenario_id)`. ChaCha is counter based, so the stream for a
//! scenario does not depend on which worker generates it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn scenario_rng(seed: u64, scenario_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(scenario_id);
    rng
}
