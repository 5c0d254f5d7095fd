//! Reproducible random streams.
//!
//! Every solver run owns one [`RngStream`]. Streams for a benchmark are
//! derived from `(master_seed, instance_id, run_index)` so the result of a
//! run never depends on how runs are scheduled across threads.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        RngStream {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Stream for run `run_index` of instance `instance_id` under `master_seed`.
    pub fn derive(master_seed: u64, instance_id: &str, run_index: u64) -> Self {
        Self::new(derive_seed(master_seed, instance_id, run_index))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform draw from [0, 1).
    #[inline]
    pub fn unit(&mut self) -> f64 {
        self.inner.gen::<f64>()
    }

    /// True with probability `p`; exact at the endpoints 0 and 1.
    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.unit() < p
    }

    /// Uniform index in `0..len`. `len` must be positive.
    #[inline]
    pub fn index(&mut self, len: usize) -> usize {
        self.inner.gen_range(0..len)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    pub(crate) fn inner_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.inner
    }
}

/// Mixes `(master_seed, instance_id, run_index)` into one 64-bit seed.
///
/// FNV-1a over the identifier bytes followed by splitmix64 finalization; both
/// are fixed functions so seeds are stable across platforms and releases.
pub fn derive_seed(master_seed: u64, instance_id: &str, run_index: u64) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in instance_id.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut s = splitmix64(master_seed);
    s = splitmix64(s ^ h);
    splitmix64(s ^ run_index.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
