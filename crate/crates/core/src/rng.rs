//! Seedable, splittable random stream shared by every randomized operation.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Deterministic pseudorandom stream.
///
/// Identical seeds yield identical streams. [`PprRng::split`] derives an
/// independent child stream from the current seed and a stream index without
/// advancing the parent, so per-item streams are reproducible regardless of
/// the order (or thread) in which they are consumed.
#[derive(Debug, Clone)]
pub struct PprRng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl PprRng {
    pub fn seed_from_u64(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Child stream `index` of this generator's seed.
    pub fn split(&self, index: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(self.seed);
        inner.set_stream(index.wrapping_add(1));
        Self {
            seed: self.seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15),
            inner,
        }
    }

    /// Uniform draw in `[0, 1)`.
    #[inline]
    pub fn unit(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Uniform index in `[0, bound)`; `bound` must be nonzero.
    #[inline]
    pub fn index(&mut self, bound: usize) -> usize {
        self.inner.random_range(0..bound)
    }

    /// Bernoulli draw with success probability `p`.
    #[inline]
    pub fn chance(&mut self, p: f64) -> bool {
        self.unit() < p
    }
}

impl RngCore for PprRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
