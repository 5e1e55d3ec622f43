//! Per-replicate random streams.
//!
//! Every replicate owns a ChaCha8 stream keyed by `(master_seed, replicate_id)`:
//! the key comes from `seed_from_u64(master_seed)` and the ChaCha stream
//! number is the replicate id. Streams are independent of scheduling, so a run
//! is reproducible bit for bit regardless of thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

pub fn replicate_stream(master_seed: u64, replicate_id: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(replicate_id);
    rng
}

/// Uniform integer in `[0, bound)`.
#[inline]
pub fn below_u64<R: Rng + ?Sized>(rng: &mut R, bound: u64) -> u64 {
    debug_assert!(bound > 0);
    rng.random_range(0..bound)
}

#[inline]
pub fn below_u128<R: Rng + ?Sized>(rng: &mut R, bound: u128) -> u128 {
    debug_assert!(bound > 0);
    rng.random_range(0..bound)
}

/// Uniform real in `[0, 1)`.
#[inline]
pub fn unit_f64<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random::<f64>()
}
