//! Counter-based random streams for reproducible Monte Carlo.
//!
//! Every path gets its own ChaCha stream derived from `(seed, path index)`,
//! so serial and parallel runs draw identical variates for a given seed and
//! the reduction order alone decides determinism (callers reduce in path
//! order).

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::math;

/// One independent random stream.
#[derive(Debug, Clone)]
pub struct PathRng {
    inner: ChaCha8Rng,
}

impl PathRng {
    /// Stream `stream` of the generator family identified by `seed`.
    pub fn stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        PathRng { inner }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on the open interval (0, 1).
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Uniform on (0, `hi`).
    #[inline]
    pub fn uniform_to(&mut self, hi: f64) -> f64 {
        self.uniform() * hi
    }

    /// Standard exponential variate.
    #[inline]
    pub fn exponential(&mut self) -> f64 {
        -math::ln(self.uniform())
    }

    /// Standard normal variate (Box-Muller; the sine companion is discarded
    /// to keep the per-call draw count fixed).
    #[inline]
    pub fn std_normal(&mut self) -> f64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        math::sqrt(-2.0 * math::ln(u1)) * math::cos(2.0 * math::PI * u2)
    }
}
