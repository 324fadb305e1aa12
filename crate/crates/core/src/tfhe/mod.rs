//! The scheme: keys, LWE/GLWE/GGSW ciphertexts, gadget decomposition,
//! external product, blind rotation, bootstrapping and key switching.

pub mod bootstrap;
pub mod decomp;
pub mod ggsw;
pub mod glwe;
pub mod keys;
pub mod keyswitch;
pub mod lwe;
pub mod params;
pub mod sampler;

pub use bootstrap::{blind_rotate, blind_rotate_step, build_lut, modswitch_2n, pbs, sample_extract, BootstrapKey};
pub use decomp::{decompose, decompose_poly, recompose, DecompParams, Decomposer};
pub use ggsw::{adder_tree, cmux, external_product, GgswCiphertext, GgswNtt, GlevCiphertext};
pub use glwe::{glwe_decrypt, glwe_encrypt, monomial_rotate, GlweCiphertext};
pub use keys::{flatten_key, keygen, GlweSecretKey, LweSecretKey};
pub use keyswitch::{key_switch, KeySwitchKey};
pub use lwe::{
    decode, decode_slot, decrypt_message, encrypt_message, lwe_add, lwe_decrypt, lwe_encrypt, lwe_mul_add,
    lwe_scalar_mul, lwe_sub, noise_of, LweCiphertext,
};
pub use params::TfheParams;
pub use sampler::Sampler;

use crate::error::Result;

/// Everything a client and a server need for one parameter set.
#[derive(Clone, Debug)]
pub struct KeySet {
    pub params: TfheParams,
    pub lwe: LweSecretKey,
    pub glwe: GlweSecretKey,
    pub bsk: BootstrapKey,
    pub ksk: KeySwitchKey,
}

impl KeySet {
    /// Secret keys from `keygen(params, seed)`; evaluation keys from a
    /// second stream derived from the same seed.
    pub fn generate(params: &TfheParams, seed: u64) -> Result<Self> {
        params.validate()?;
        let (lwe, glwe) = keygen(params, seed);
        let mut s = Sampler::new(seed ^ 0x9e37_79b9_7f4a_7c15);
        let bsk = BootstrapKey::generate(params, &lwe, &glwe, &mut s.fork())?;
        let ksk = KeySwitchKey::generate(&flatten_key(&glwe), &lwe, params.ks_decomp, params.sigma, &mut s.fork())?;
        Ok(Self {
            params: params.clone(),
            lwe,
            glwe,
            bsk,
            ksk,
        })
    }

    pub fn encrypt(&self, m: u64, sampler: &mut Sampler) -> Result<LweCiphertext> {
        encrypt_message(m, &self.lwe, &self.params, sampler)
    }

    pub fn decrypt(&self, ct: &LweCiphertext) -> Result<u64> {
        decrypt_message(ct, &self.lwe, &self.params)
    }

    pub fn lut(&self, table: &[u64]) -> Result<GlweCiphertext> {
        build_lut(table, &self.params)
    }

    /// `key_switch(pbs(ct, lut))`.
    pub fn bootstrap(&self, ct: &LweCiphertext, lut: &GlweCiphertext) -> Result<LweCiphertext> {
        key_switch(&pbs(ct, lut, &self.bsk, 0)?, &self.ksk)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn end_to_end_standard() {
        let ks = KeySet::generate(&TfheParams::standard(), 42).unwrap();
        let mut s = Sampler::new(1);
        let table: Vec<u64> = (0..16).map(|m| (m * m) % 16).collect();
        let lut = ks.lut(&table).unwrap();
        for m in [0, 1, 7, 15] {
            let ct = ks.encrypt(m, &mut s).unwrap();
            assert_eq!(
                ks.decrypt(&ks.bootstrap(&ct, &lut).unwrap()).unwrap(),
                table[m as usize]
            );
        }
    }

    #[test]
    fn output_noise_is_fresh() {
        let ks = KeySet::generate(&TfheParams::standard(), 43).unwrap();
        let mut s = Sampler::new(2);
        let lut = ks.lut(&(0..16).collect::<Vec<_>>()).unwrap();
        let flat = flatten_key(&ks.glwe);
        let delta = ks.params.delta() as i64;
        // inputs with near-maximal tolerated noise
        for (m, e) in [(3u64, delta / 2 - delta / 8), (9, -(delta / 2 - delta / 8))] {
            let mut ct = ks.encrypt(m, &mut s).unwrap();
            ct.body += crate::field::FieldElement::from_i64(e);
            let out = pbs(&ct, &lut, &ks.bsk, 0).unwrap();
            let noise = noise_of(&out, &flat, ks.params.encode(m).unwrap()).unwrap();
            assert!(noise.unsigned_abs() < ks.params.e_max() / 64, "{noise}");
        }
    }
}
