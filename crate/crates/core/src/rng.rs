//! Splittable, reproducible random streams.
//!
//! Every sampler in this crate takes an explicit [`RngStream`]. A stream is
//! identified by a 64-bit key; child streams are derived from the parent key
//! and a child index, never from the parent's draw position. Shot-level work
//! can therefore run on any number of threads and still reproduce the exact
//! same numbers: shot `i` always uses `base.substream(i)`.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer, used to decorrelate derived stream keys.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A counter-based random stream that can be split into independent children.
#[derive(Debug, Clone)]
pub struct RngStream {
    key: u64,
    rng: ChaCha12Rng,
}

impl RngStream {
    pub fn from_seed(seed: u64) -> Self {
        Self {
            key: seed,
            rng: ChaCha12Rng::seed_from_u64(seed),
        }
    }

    /// The key this stream was created with.
    pub fn key(&self) -> u64 {
        self.key
    }

    /// Derives an independent child stream. The result depends only on the
    /// parent key and `index`, not on how much the parent has been used.
    pub fn substream(&self, index: u64) -> Self {
        Self::from_seed(mix(self.key ^ mix(index)))
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    /// Standard normal draw.
    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(rand_distr::StandardNormal)
    }

    /// Uniform integer in `[0, bound)`.
    pub fn below(&mut self, bound: u64) -> u64 {
        self.rng.gen_range(0..bound)
    }

    /// `n` uniform bits packed into the low end of a `u64` (`n <= 64`).
    pub fn bits(&mut self, n: usize) -> u64 {
        debug_assert!(n <= 64);
        if n == 0 {
            0
        } else if n == 64 {
            self.rng.gen::<u64>()
        } else {
            self.rng.gen::<u64>() & ((1u64 << n) - 1)
        }
    }

    /// Bernoulli draw consuming exactly one uniform.
    pub fn coin(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// Samples an index from a cumulative draw over `weights` (need not be
    /// normalized). Falls back to the last index on round-off.
    pub fn weighted_index(&mut self, weights: &[f64]) -> usize {
        let total: f64 = weights.iter().sum();
        let mut u = self.uniform() * total;
        for (i, w) in weights.iter().enumerate() {
            u -= w;
            if u < 0.0 {
                return i;
            }
        }
        weights.len() - 1
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }
    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }
    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.rng.try_fill_bytes(dest)
    }
}
