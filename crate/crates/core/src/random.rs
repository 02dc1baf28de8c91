//! Seeded random data for initial guesses and tests.

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scalar::Scalar;
use crate::tensor::DenseTensor;

/// Deterministic generator; identical seeds give identical streams on every
/// platform.
pub struct Rng(ChaCha8Rng);

impl Rng {
    pub fn seeded(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Uniform on `[-1, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.0.random_range(-1.0..1.0)
    }

    /// Standard normal via Box-Muller.
    pub fn normal(&mut self) -> f64 {
        let u1: f64 = 1.0 - self.0.random::<f64>();
        let u2: f64 = self.0.random();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.0.random_range(0..n)
    }

    pub fn range(&mut self, lo: usize, hi_inclusive: usize) -> usize {
        self.0.random_range(lo..=hi_inclusive)
    }

    pub fn fill<T: Scalar>(&mut self, len: usize) -> Vec<T> {
        (0..len).map(|_| T::of(self.normal())).collect()
    }
}

/// Dense tensor with independent standard normal entries.
pub fn dense_random<T: Scalar>(rng: &mut Rng, shape: &[usize]) -> DenseTensor<T> {
    let len = shape.iter().product();
    DenseTensor::new(shape.to_vec(), rng.fill(len)).expect("shape is positive")
}
