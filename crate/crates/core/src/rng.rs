//! Seeded, splittable random streams for reproducible Monte Carlo runs.
//!
//! ChaCha is a counter-based stream cipher, so every (seed, stream) pair
//! yields the same sequence on every platform. One stream per trial keeps
//! trials independent and order-insensitive.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

pub type StreamRng = ChaCha12Rng;

/// Factory for per-trial RNG streams derived from a single experiment seed.
#[derive(Debug, Clone, Copy)]
pub struct RngStreams {
    seed: u64,
}

impl RngStreams {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent stream for the given id (e.g. one per Monte Carlo trial).
    pub fn stream(&self, id: u64) -> StreamRng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(id);
        rng
    }
}

/// One draw from the standard circularly-symmetric complex Gaussian CN(0, 1)
/// via Box-Muller on paired uniforms: sqrt(-ln u1) * e^{j 2 pi u2}.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    // u1 in (0, 1]: avoids ln(0)
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    let r = (-u1.ln()).sqrt();
    let phi = 2.0 * std::f64::consts::PI * u2;
    Complex64::from_polar(r, phi)
}
