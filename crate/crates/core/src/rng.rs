//! Seeded randomness. Every party draws from its own ChaCha20 stream
//! derived from one session seed, so a seed pins an entire session.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
pub use rand_chacha::ChaCha20Rng;

use crate::field::{Fe, PrimeField};

pub const DATABASE_STREAM: u64 = 0;
pub const DEALER_STREAM: u64 = 1;
pub const USER_STREAM: u64 = 2;

pub fn stream(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform element of the field (rejection-sampled by `gen_range`).
#[inline]
pub fn uniform<R: Rng + ?Sized>(field: PrimeField, rng: &mut R) -> Fe {
    field.elem(rng.gen_range(0..field.modulus()) as u64)
}

pub fn uniform_vec<R: Rng + ?Sized>(field: PrimeField, len: usize, rng: &mut R) -> Vec<Fe> {
    (0..len).map(|_| uniform(field, rng)).collect()
}

/// Derives an independent seed for block `index` of a multi-block retrieval.
pub fn block_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finaliser
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
