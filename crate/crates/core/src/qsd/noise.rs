//! Complex Wiener increments `dξ` with `E[dξ] = 0`, `E[dξ²] = 0`,
//! `E[|dξ|²] = dt`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Source of complex noise increments for one trajectory.
pub trait NoiseSource {
    fn increment(&mut self, dt: f64) -> Complex64;
}

/// Deterministic increment stream: identical `(seed, stream)` gives a
/// bit-identical sequence on any thread.
#[derive(Clone, Debug)]
pub struct NoiseStream {
    seed: u64,
    stream: u64,
    counter: u64,
    rng: ChaCha8Rng,
}

impl NoiseStream {
    pub fn new(seed: u64) -> Self {
        Self::substream(seed, 0)
    }

    /// Independent substream `stream` of the generator keyed by `seed`.
    pub fn substream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self {
            seed,
            stream,
            counter: 0,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Number of increments drawn so far.
    pub fn counter(&self) -> u64 {
        self.counter
    }

    /// `√(dt/2) (g₁ + i g₂)` with independent standard normals.
    pub fn sample(&mut self, dt: f64) -> Complex64 {
        let g1: f64 = self.rng.sample(StandardNormal);
        let g2: f64 = self.rng.sample(StandardNormal);
        self.counter += 1;
        Complex64::new(g1, g2) * (0.5 * dt).sqrt()
    }
}

impl NoiseSource for NoiseStream {
    fn increment(&mut self, dt: f64) -> Complex64 {
        self.sample(dt)
    }
}

/// Coarse increments formed by summing consecutive pairs of a finer
/// stream, so a `dt` path and a `dt/2` path share one Brownian motion.
#[derive(Clone, Debug)]
pub struct PairSummed<S> {
    inner: S,
}

impl<S: NoiseSource> PairSummed<S> {
    pub fn new(inner: S) -> Self {
        Self { inner }
    }
}

impl<S: NoiseSource> NoiseSource for PairSummed<S> {
    fn increment(&mut self, dt: f64) -> Complex64 {
        self.inner.increment(0.5 * dt) + self.inner.increment(0.5 * dt)
    }
}

/// Noise-free source, for deterministic drift checks.
#[derive(Clone, Copy, Debug, Default)]
pub struct Silent;

impl NoiseSource for Silent {
    fn increment(&mut self, _dt: f64) -> Complex64 {
        Complex64::new(0.0, 0.0)
    }
}
