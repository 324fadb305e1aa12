use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

use crate::field::{FieldElement, Q};
use crate::ntt::PolyCoeffs;

/// Seeded source of uniform masks, key bits and rounded Gaussian errors.
#[derive(Clone, Debug)]
pub struct Sampler {
    rng: ChaCha20Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha20Rng::seed_from_u64(seed),
        }
    }

    /// Independent child stream, e.g. one per key component.
    pub fn fork(&mut self) -> Self {
        Self::new(self.rng.random())
    }

    pub fn uniform(&mut self) -> FieldElement {
        FieldElement::new(self.rng.random_range(0..Q))
    }

    pub fn uniform_vec(&mut self, len: usize) -> Vec<FieldElement> {
        (0..len).map(|_| self.uniform()).collect()
    }

    pub fn uniform_poly(&mut self, n: usize) -> PolyCoeffs {
        PolyCoeffs(self.uniform_vec(n))
    }

    pub fn bit(&mut self) -> u8 {
        self.rng.random::<bool>() as u8
    }

    pub fn bits(&mut self, len: usize) -> Vec<u8> {
        (0..len).map(|_| self.bit()).collect()
    }

    /// Rounded Gaussian with standard deviation `sigma·q`, centred at 0.
    pub fn gaussian(&mut self, sigma: f64) -> FieldElement {
        if sigma == 0.0 {
            return FieldElement::ZERO;
        }
        let normal = Normal::new(0.0, sigma * Q as f64).expect("finite sigma");
        FieldElement::from_i64(normal.sample(&mut self.rng).round() as i64)
    }

    pub fn gaussian_poly(&mut self, n: usize, sigma: f64) -> PolyCoeffs {
        if sigma == 0.0 {
            return PolyCoeffs::zero(n);
        }
        let normal = Normal::new(0.0, sigma * Q as f64).expect("finite sigma");
        PolyCoeffs(
            (0..n)
                .map(|_| FieldElement::from_i64(normal.sample(&mut self.rng).round() as i64))
                .collect(),
        )
    }

    pub fn random_u64(&mut self) -> u64 {
        self.rng.random()
    }

    pub fn below(&mut self, bound: u64) -> u64 {
        self.rng.random_range(0..bound)
    }
}
