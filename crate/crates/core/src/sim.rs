//! Fixed-timestep clock and seeded random streams.
//!
//! Simulated time is an integer step count times a constant `dt`; nothing in
//! here reads the wall clock.

use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Default physics tick: 128 ticks span 0.512 s.
pub const DEFAULT_DT_PHYSICS: f64 = 0.004;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimClock {
    dt_physics: f64,
    steps: u64,
}

impl SimClock {
    pub fn new(dt_physics: f64) -> Result<Self> {
        if !(dt_physics.is_finite() && dt_physics > 0.0) {
            return Err(Error::Config(format!(
                "dt_physics must be positive and finite, got {dt_physics}"
            )));
        }
        Ok(Self { dt_physics, steps: 0 })
    }

    pub fn dt(&self) -> f64 {
        self.dt_physics
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// `steps * dt`, computed as a product so no rounding accumulates.
    pub fn time(&self) -> f64 {
        self.steps as f64 * self.dt_physics
    }

    #[must_use]
    pub fn advanced(self) -> Self {
        Self {
            steps: self.steps + 1,
            ..self
        }
    }

    pub fn advance(&mut self) {
        self.steps += 1;
    }

    pub fn reset(&mut self) {
        self.steps = 0;
    }
}

impl Default for SimClock {
    fn default() -> Self {
        Self {
            dt_physics: DEFAULT_DT_PHYSICS,
            steps: 0,
        }
    }
}

/// Well-known stream ids, one per consumer.
pub mod streams {
    pub const PHYSICS: u64 = 0;
    pub const SCENE: u64 = 1;
    pub const DATASET: u64 = 2;
    pub const TASK: u64 = 3;
    pub const POLICY: u64 = 4;

    /// Per-item sub-stream of `base`, e.g. one per dataset sample.
    pub fn indexed(base: u64, index: u64) -> u64 {
        (base << 40) | (index & ((1 << 40) - 1))
    }
}

/// A reproducible random sequence identified by `(seed, stream_id)`.
///
/// Backed by ChaCha8 with the stream id in the cipher's stream word, so
/// distinct ids give independent sequences and values do not depend on the
/// platform.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

pub fn derive_stream(seed: u64, stream_id: u64) -> RngStream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    RngStream { seed, stream_id, rng }
}

impl RngStream {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform in `[lo, hi)`; returns `lo` when the range is empty.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return lo;
        }
        lo + (hi - lo) * self.unit()
    }

    /// Uniform integer in `0..n`. Panics if `n == 0`.
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0, "index() on an empty range");
        self.rng.random_range(0..n)
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.unit() < p
    }

    /// Standard normal sample (Box-Muller).
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.unit();
        let u2 = self.unit();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    pub fn rng_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}
