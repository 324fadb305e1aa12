use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldElement;
use crate::tfhe::keys::LweSecretKey;
use crate::tfhe::params::TfheParams;
use crate::tfhe::sampler::Sampler;

/// `(a, b)` with `b = ⟨a, sk⟩ + Δm + e`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LweCiphertext {
    pub mask: Vec<FieldElement>,
    pub body: FieldElement,
}

impl LweCiphertext {
    pub fn zero(dim: usize) -> Self {
        Self {
            mask: vec![FieldElement::ZERO; dim],
            body: FieldElement::ZERO,
        }
    }

    /// Noiseless, mask-free encryption of `body`.
    pub fn trivial(dim: usize, body: FieldElement) -> Self {
        Self {
            mask: vec![FieldElement::ZERO; dim],
            body,
        }
    }

    pub fn dim(&self) -> usize {
        self.mask.len()
    }
}

fn same_dim(c1: &LweCiphertext, c2: &LweCiphertext) -> Result<()> {
    if c1.dim() != c2.dim() {
        return Err(Error::LengthMismatch {
            expected: c1.dim(),
            actual: c2.dim(),
        });
    }
    Ok(())
}

pub fn lwe_encrypt(m_scaled: FieldElement, key: &LweSecretKey, sigma: f64, sampler: &mut Sampler) -> LweCiphertext {
    let mask = sampler.uniform_vec(key.len());
    let e = sampler.gaussian(sigma);
    let body = key.dot(&mask).expect("mask sized to key") + m_scaled + e;
    LweCiphertext { mask, body }
}

/// Encodes `m ∈ [0, p)` and encrypts it with the parameter set's `sigma`.
pub fn encrypt_message(
    m: u64,
    key: &LweSecretKey,
    params: &TfheParams,
    sampler: &mut Sampler,
) -> Result<LweCiphertext> {
    let encoded = params.encode(m)?;
    Ok(lwe_encrypt(encoded, key, params.sigma, sampler))
}

/// Phase `b − ⟨a, sk⟩`.
pub fn lwe_decrypt(ct: &LweCiphertext, key: &LweSecretKey) -> Result<FieldElement> {
    Ok(ct.body - key.dot(&ct.mask)?)
}

/// Index in `[0, 2p)` of the nearest multiple of `Δ`, ties upward.
pub fn decode_slot(phase: FieldElement, params: &TfheParams) -> u64 {
    let delta = params.delta() as u128;
    ((2 * phase.value() as u128 + delta) / (2 * delta)) as u64 % (2 * params.plaintext_modulus)
}

/// Nearest multiple of `Δ` among the `2p` slots, ties upward. Slots in the
/// upper half are the padding region and are rejected.
pub fn decode(phase: FieldElement, params: &TfheParams) -> Result<u64> {
    let slots = 2 * params.plaintext_modulus;
    let slot = decode_slot(phase, params);
    if slot >= params.plaintext_modulus {
        return Err(Error::PaddingOverflow { slot, slots });
    }
    Ok(slot)
}

pub fn decrypt_message(ct: &LweCiphertext, key: &LweSecretKey, params: &TfheParams) -> Result<u64> {
    decode(lwe_decrypt(ct, key)?, params)
}

pub fn lwe_add(c1: &LweCiphertext, c2: &LweCiphertext) -> Result<LweCiphertext> {
    same_dim(c1, c2)?;
    Ok(LweCiphertext {
        mask: c1.mask.iter().zip(&c2.mask).map(|(&a, &b)| a + b).collect(),
        body: c1.body + c2.body,
    })
}

pub fn lwe_sub(c1: &LweCiphertext, c2: &LweCiphertext) -> Result<LweCiphertext> {
    same_dim(c1, c2)?;
    Ok(LweCiphertext {
        mask: c1.mask.iter().zip(&c2.mask).map(|(&a, &b)| a - b).collect(),
        body: c1.body - c2.body,
    })
}

pub fn lwe_scalar_mul(c: &LweCiphertext, s: FieldElement) -> LweCiphertext {
    LweCiphertext {
        mask: c.mask.iter().map(|&a| a * s).collect(),
        body: c.body * s,
    }
}

/// `s·c1 + c2`, the MulAdd datapath.
pub fn lwe_mul_add(c1: &LweCiphertext, s: FieldElement, c2: &LweCiphertext) -> Result<LweCiphertext> {
    same_dim(c1, c2)?;
    Ok(LweCiphertext {
        mask: c1.mask.iter().zip(&c2.mask).map(|(&a, &b)| a * s + b).collect(),
        body: c1.body * s + c2.body,
    })
}

/// Centred `phase − expected`.
pub fn noise_of(ct: &LweCiphertext, key: &LweSecretKey, expected_scaled: FieldElement) -> Result<i64> {
    Ok((lwe_decrypt(ct, key)? - expected_scaled).centered())
}

/// Scalar for small signed integers, negative values as `q − |s|`.
pub fn signed_scalar(s: i64) -> FieldElement {
    FieldElement::from_i64(s)
}
