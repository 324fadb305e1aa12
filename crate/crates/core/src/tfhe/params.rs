use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldElement, Q};
use crate::tfhe::decomp::DecompParams;

/// Scheme parameters. `q` is fixed to the Solinas prime.
///
/// `sigma` is the standard deviation (as a fraction of `q`) used for LWE
/// encryption and the key-switching key; `glwe_sigma` is used for the
/// bootstrapping key.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TfheParams {
    pub name: String,
    /// LWE mask dimension `n`.
    pub lwe_dim: usize,
    /// Polynomial degree `N`.
    pub poly_size: usize,
    /// GLWE mask dimension `k`.
    pub glwe_dim: usize,
    pub pbs_decomp: DecompParams,
    pub ks_decomp: DecompParams,
    /// Plaintext modulus `p`.
    pub plaintext_modulus: u64,
    pub sigma: f64,
    pub glwe_sigma: f64,
}

pub const DEFAULT_SIGMA: f64 = 2.9802322387695312e-8; // 2^-25
pub const DEFAULT_GLWE_SIGMA: f64 = 9.094947017729282e-13; // 2^-40

impl TfheParams {
    /// `n = 500, N = 1024, k = 1, ℓ = 2, β = 2^10`, `p = 16`.
    pub fn standard() -> Self {
        Self {
            name: "standard".into(),
            lwe_dim: 500,
            poly_size: 1024,
            glwe_dim: 1,
            pbs_decomp: DecompParams::new(10, 2),
            ks_decomp: DecompParams::new(4, 4),
            plaintext_modulus: 16,
            sigma: DEFAULT_SIGMA,
            glwe_sigma: DEFAULT_GLWE_SIGMA,
        }
    }

    /// `n = 800, N = 16384, k = 1, ℓ = 5, β = 2^6`, `p = 16`.
    pub fn large() -> Self {
        Self {
            name: "large".into(),
            lwe_dim: 800,
            poly_size: 16384,
            glwe_dim: 1,
            pbs_decomp: DecompParams::new(6, 5),
            ks_decomp: DecompParams::new(4, 4),
            plaintext_modulus: 16,
            sigma: DEFAULT_SIGMA,
            glwe_sigma: DEFAULT_GLWE_SIGMA,
        }
    }

    /// Small insecure set for quick functional runs.
    pub fn toy() -> Self {
        Self {
            name: "toy".into(),
            lwe_dim: 32,
            poly_size: 256,
            glwe_dim: 1,
            pbs_decomp: DecompParams::new(10, 2),
            ks_decomp: DecompParams::new(4, 4),
            plaintext_modulus: 8,
            sigma: DEFAULT_SIGMA,
            glwe_sigma: DEFAULT_GLWE_SIGMA,
        }
    }

    pub fn preset_names() -> &'static [&'static str] {
        &["standard", "large", "toy"]
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "standard" => Some(Self::standard()),
            "large" => Some(Self::large()),
            "toy" => Some(Self::toy()),
            _ => None,
        }
    }

    pub fn with_plaintext_modulus(mut self, p: u64) -> Self {
        self.plaintext_modulus = p;
        self
    }

    pub fn with_sigma(mut self, sigma: f64, glwe_sigma: f64) -> Self {
        self.sigma = sigma;
        self.glwe_sigma = glwe_sigma;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if self.lwe_dim == 0 {
            return bad("n must be positive".into());
        }
        if !self.poly_size.is_power_of_two() || self.poly_size > 1 << 31 {
            return bad(format!("N = {} must be a power of two ≤ 2^31", self.poly_size));
        }
        if self.glwe_dim == 0 {
            return bad("k must be positive".into());
        }
        self.pbs_decomp.validate()?;
        self.ks_decomp.validate()?;
        let p = self.plaintext_modulus;
        if p < 2 || !p.is_power_of_two() || p > self.poly_size as u64 {
            return bad(format!("p = {p} must be a power of two in [2, N]"));
        }
        for (label, s) in [("sigma", self.sigma), ("glwe_sigma", self.glwe_sigma)] {
            if !(s.is_finite() && s >= 0.0) {
                return bad(format!("{label} = {s} must be finite and non-negative"));
            }
        }
        Ok(())
    }

    /// `Δ = round(q / 2p)`.
    pub fn delta(&self) -> u64 {
        let two_p = 2 * self.plaintext_modulus as u128;
        ((Q as u128 + two_p / 2) / two_p) as u64
    }

    /// `e_max = Δ / 2`.
    pub fn e_max(&self) -> u64 {
        self.delta() / 2
    }

    /// `Δ·m` as a field element.
    pub fn encode(&self, m: u64) -> Result<FieldElement> {
        if m >= self.plaintext_modulus {
            return Err(Error::InvalidParams(format!(
                "message {m} outside [0, {})",
                self.plaintext_modulus
            )));
        }
        Ok(FieldElement::new(self.delta()) * FieldElement::new(m))
    }

    /// Dimension of sample-extracted ciphertexts, `kN`.
    pub fn extracted_dim(&self) -> usize {
        self.glwe_dim * self.poly_size
    }

    pub fn log_poly_size(&self) -> u32 {
        self.poly_size.trailing_zeros()
    }
}
