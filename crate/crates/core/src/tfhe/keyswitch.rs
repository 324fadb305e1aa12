use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldElement;
use crate::tfhe::decomp::{DecompParams, Decomposer};
use crate::tfhe::keys::LweSecretKey;
use crate::tfhe::lwe::{lwe_encrypt, LweCiphertext};
use crate::tfhe::sampler::Sampler;

/// `kN × ℓ_ks` LWE ciphertexts under `sk`; entry `(i, j)` encrypts
/// `−S'_i · round(q/β^j)` when `negated` is set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeySwitchKey {
    pub elements: Vec<LweCiphertext>,
    pub input_dim: usize,
    pub output_dim: usize,
    pub decomp: DecompParams,
    pub negated: bool,
}

impl KeySwitchKey {
    /// Negated key from the extracted key `from` to `to`.
    pub fn generate(
        from: &LweSecretKey,
        to: &LweSecretKey,
        decomp: DecompParams,
        sigma: f64,
        sampler: &mut Sampler,
    ) -> Result<Self> {
        decomp.validate()?;
        let gadgets = decomp.gadgets();
        let mut elements = Vec::with_capacity(from.len() * decomp.ell);
        for &bit in from.bits() {
            let s = -FieldElement::new(bit as u64);
            for &g in &gadgets {
                elements.push(lwe_encrypt(s * FieldElement::new(g), to, sigma, sampler));
            }
        }
        Ok(Self {
            elements,
            input_dim: from.len(),
            output_dim: to.len(),
            decomp,
            negated: true,
        })
    }

    pub fn get(&self, i: usize, j: usize) -> &LweCiphertext {
        &self.elements[i * self.decomp.ell + j]
    }
}

/// `(0, …, 0, b) + Σ_i Σ_j Decomp(a_i)_j · KSK_{i,j}` with a negated key.
pub fn key_switch(ct: &LweCiphertext, ksk: &KeySwitchKey) -> Result<LweCiphertext> {
    if ct.dim() != ksk.input_dim {
        return Err(Error::LengthMismatch {
            expected: ksk.input_dim,
            actual: ct.dim(),
        });
    }
    let ell = ksk.decomp.ell;
    let dec = Decomposer::new(ksk.decomp);
    let mut out = LweCiphertext::trivial(ksk.output_dim, ct.body);
    let mut digits = vec![0i64; ell];
    for (i, &a) in ct.mask.iter().enumerate() {
        dec.digits_signed(a, &mut digits);
        for (j, &d) in digits.iter().enumerate() {
            if d == 0 {
                continue;
            }
            let mut d = FieldElement::from_i64(d);
            if !ksk.negated {
                d = -d;
            }
            let k = &ksk.elements[i * ell + j];
            for (o, &x) in out.mask.iter_mut().zip(&k.mask) {
                *o += d * x;
            }
            out.body += d * k.body;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tfhe::keys::{flatten_key, keygen};
    use crate::tfhe::lwe::{decrypt_message, encrypt_message, lwe_decrypt};
    use crate::tfhe::params::TfheParams;

    #[test]
    fn shape_and_flag() {
        let prm = TfheParams::toy();
        let (sk, gk) = keygen(&prm, 1);
        let ksk = KeySwitchKey::generate(&flatten_key(&gk), &sk, prm.ks_decomp, 0.0, &mut Sampler::new(2)).unwrap();
        assert_eq!(ksk.elements.len(), prm.poly_size * prm.ks_decomp.ell);
        assert!(ksk.negated);
        // entry decrypts to −S'_i·g_j
        let flat = flatten_key(&gk);
        for i in 0..8 {
            let want = -FieldElement::new(flat.bits()[i] as u64) * FieldElement::new(prm.ks_decomp.gadget(1));
            assert_eq!(lwe_decrypt(ksk.get(i, 0), &sk).unwrap(), want);
        }
    }

    #[test]
    fn noiseless_switch_error_within_bound() {
        let prm = TfheParams::standard();
        let (sk, gk) = keygen(&prm, 3);
        let flat = flatten_key(&gk);
        let mut s = Sampler::new(4);
        let ksk = KeySwitchKey::generate(&flat, &sk, prm.ks_decomp, 0.0, &mut s).unwrap();
        let weight = flat.bits().iter().filter(|&&b| b == 1).count() as u64;
        for m in 0..16 {
            let ct = lwe_encrypt(prm.encode(m).unwrap(), &flat, 0.0, &mut s);
            let out = key_switch(&ct, &ksk).unwrap();
            assert_eq!(out.dim(), 500);
            let err = (lwe_decrypt(&out, &sk).unwrap() - prm.encode(m).unwrap())
                .centered()
                .unsigned_abs();
            assert!(err <= weight * prm.ks_decomp.reconstruction_bound());
            assert!(err < prm.e_max());
            assert_eq!(decrypt_message(&out, &sk, &prm).unwrap(), m);
        }
    }

    #[test]
    fn noisy_switch_and_zero() {
        let prm = TfheParams::standard();
        let (sk, gk) = keygen(&prm, 5);
        let flat = flatten_key(&gk);
        let mut s = Sampler::new(6);
        let ksk = KeySwitchKey::generate(&flat, &sk, prm.ks_decomp, prm.sigma, &mut s).unwrap();
        for m in 0..16 {
            let ct = encrypt_message(m, &flat, &prm, &mut s).unwrap();
            assert_eq!(decrypt_message(&key_switch(&ct, &ksk).unwrap(), &sk, &prm).unwrap(), m);
        }
        let zero = key_switch(&LweCiphertext::zero(1024), &ksk).unwrap();
        assert_eq!(decrypt_message(&zero, &sk, &prm).unwrap(), 0);
        assert!(key_switch(&LweCiphertext::zero(10), &ksk).is_err());
    }

    #[test]
    fn non_negated_key_also_works() {
        let prm = TfheParams::toy();
        let (sk, gk) = keygen(&prm, 7);
        let flat = flatten_key(&gk);
        let mut s = Sampler::new(8);
        let mut ksk = KeySwitchKey::generate(&flat, &sk, prm.ks_decomp, 0.0, &mut s).unwrap();
        for e in &mut ksk.elements {
            *e = crate::tfhe::lwe::lwe_scalar_mul(e, FieldElement::MINUS_ONE);
        }
        ksk.negated = false;
        let ct = encrypt_message(5, &flat, &prm, &mut s).unwrap();
        assert_eq!(decrypt_message(&key_switch(&ct, &ksk).unwrap(), &sk, &prm).unwrap(), 5);
    }
}
