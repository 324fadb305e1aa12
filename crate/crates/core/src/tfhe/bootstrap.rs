use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{fe_neg, FieldElement, Q};
use crate::ntt::PolyCoeffs;
use crate::tfhe::ggsw::{external_product, GgswCiphertext, GgswNtt};
use crate::tfhe::glwe::{rotate_into, GlweCiphertext};
use crate::tfhe::keys::{GlweSecretKey, LweSecretKey};
use crate::tfhe::lwe::LweCiphertext;
use crate::tfhe::params::TfheParams;
use crate::tfhe::sampler::Sampler;

/// `n` evaluation-domain GGSW ciphertexts, element `i` encrypting `sk_i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BootstrapKey {
    pub elements: Vec<GgswNtt>,
}

impl BootstrapKey {
    pub fn generate(
        params: &TfheParams,
        lwe_sk: &LweSecretKey,
        glwe_sk: &GlweSecretKey,
        sampler: &mut Sampler,
    ) -> Result<Self> {
        let elements = lwe_sk
            .bits()
            .iter()
            .map(|&b| {
                GgswCiphertext::encrypt(
                    FieldElement::new(b as u64),
                    glwe_sk,
                    params.pbs_decomp,
                    params.glwe_sigma,
                    sampler,
                )?
                .to_ntt()
            })
            .collect::<Result<_>>()?;
        Ok(Self { elements })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// `round(x · 2N / q) mod 2N`, ties upward.
pub fn modswitch_2n(x: FieldElement, poly_size: usize) -> usize {
    let two_n = 2 * poly_size as u128;
    let q = Q as u128;
    (((2 * x.value() as u128 * two_n + q) / (2 * q)) % two_n) as usize
}

/// `acc' = acc ⊡ BSK_i`, then `acc'·X^{ã_i} + acc − acc'`.
pub fn blind_rotate_step(acc: &GlweCiphertext, a_i: FieldElement, bsk_i: &GgswNtt) -> Result<GlweCiphertext> {
    let rotated_by = modswitch_2n(a_i, acc.poly_size());
    if rotated_by == 0 {
        // X^0 − 1 = 0: the step is the identity
        return Ok(acc.clone());
    }
    let prod = external_product(acc, bsk_i)?;
    let mut out = acc.clone();
    let mut buf = vec![FieldElement::ZERO; acc.poly_size()];
    for (o, p) in out.polys_mut().zip(prod.polys()) {
        rotate_into(p.coeffs(), rotated_by, &mut buf);
        for ((oc, &r), &pc) in o.0.iter_mut().zip(&buf).zip(p.coeffs()) {
            *oc = *oc + r - pc;
        }
    }
    Ok(out)
}

/// Rotates `acc` by `X^{−b̃}` and then by `X^{ã_i·sk_i}` for every mask element.
pub fn blind_rotate(acc: &GlweCiphertext, ct: &LweCiphertext, bsk: &BootstrapKey) -> Result<GlweCiphertext> {
    if ct.dim() != bsk.len() {
        return Err(Error::LengthMismatch {
            expected: bsk.len(),
            actual: ct.dim(),
        });
    }
    let n = acc.poly_size();
    let b = modswitch_2n(ct.body, n);
    let mut acc = acc.rotate((2 * n - b) % (2 * n))?;
    for (&a, g) in ct.mask.iter().zip(&bsk.elements) {
        acc = blind_rotate_step(&acc, a, g)?;
    }
    Ok(acc)
}

/// Trivial GLWE whose body holds `Δ·table[m]` over a window of `N/p`
/// coefficients around `m·N/p`, pre-rotated by half a window so that
/// coefficient 0 after blind rotation reads the table entry.
pub fn build_lut(table: &[u64], params: &TfheParams) -> Result<GlweCiphertext> {
    let p = params.plaintext_modulus as usize;
    if table.len() != p {
        return Err(Error::LengthMismatch {
            expected: p,
            actual: table.len(),
        });
    }
    let n = params.poly_size;
    let window = n / p;
    let mut g = PolyCoeffs::zero(n);
    for (i, c) in g.0.iter_mut().enumerate() {
        *c = params.encode(table[i / window] % params.plaintext_modulus)?;
    }
    let half = window / 2;
    let body = crate::tfhe::glwe::monomial_rotate(&g, (2 * n - half) % (2 * n))?;
    Ok(GlweCiphertext::trivial(params.glwe_dim, body))
}

/// LWE encryption (under the flattened key) of coefficient `h` of `c`.
pub fn sample_extract(c: &GlweCiphertext, h: usize) -> Result<LweCiphertext> {
    let n = c.poly_size();
    if h >= n {
        return Err(Error::IndexOutOfRange { index: h, limit: n });
    }
    let mut mask = Vec::with_capacity(c.glwe_dim() * n);
    for a in &c.mask {
        let a = a.coeffs();
        for j in 0..n {
            mask.push(if j <= h { a[h - j] } else { fe_neg(a[n + h - j]) });
        }
    }
    Ok(LweCiphertext {
        mask,
        body: c.body.coeffs()[h],
    })
}

/// Blind rotation followed by extraction at index `h`.
pub fn pbs(ct: &LweCiphertext, lut: &GlweCiphertext, bsk: &BootstrapKey, h: usize) -> Result<LweCiphertext> {
    sample_extract(&blind_rotate(lut, ct, bsk)?, h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ntt::schoolbook_negacyclic_mul;
    use crate::tfhe::glwe::{glwe_decrypt, glwe_encrypt, monomial_rotate};
    use crate::tfhe::keys::{flatten_key, keygen};
    use crate::tfhe::lwe::{decode, decode_slot, lwe_add, lwe_decrypt, lwe_encrypt};

    fn small_params(n: usize, big_n: usize, p: u64) -> TfheParams {
        let mut prm = TfheParams::toy().with_plaintext_modulus(p).with_sigma(0.0, 0.0);
        prm.lwe_dim = n;
        prm.poly_size = big_n;
        prm
    }

    #[test]
    fn modswitch_examples() {
        assert_eq!(modswitch_2n(FieldElement::ZERO, 1024), 0);
        assert_eq!(modswitch_2n(FieldElement::new(Q / 2 + 1), 1024), 1024);
        assert_eq!(modswitch_2n(FieldElement::new(Q - 1), 1024), 0);
    }

    #[test]
    fn modswitch_against_rational_oracle() {
        let mut s = Sampler::new(1);
        for big_n in [16usize, 1024, 16384] {
            let two_n = 2 * big_n as i128;
            for _ in 0..100_000 {
                let x = s.uniform();
                let r = modswitch_2n(x, big_n) as i128;
                // |x·2N − r·q| ≤ q/2, modulo the wrap
                let q = Q as i128;
                let mut diff = x.value() as i128 * two_n - r * q;
                if diff > two_n * q / 2 {
                    diff -= two_n * q;
                }
                if diff < -two_n * q / 2 {
                    diff += two_n * q;
                }
                assert!(2 * diff.abs() <= q, "x = {x}, r = {r}");
                assert!(r < two_n);
            }
        }
    }

    #[test]
    fn sample_extract_trivial_and_phase() {
        let prm = small_params(4, 64, 8);
        let (_, gk) = keygen(&prm, 2);
        let flat = flatten_key(&gk);
        let mut s = Sampler::new(3);
        let f = s.uniform_poly(64);
        let triv = GlweCiphertext::trivial(1, f.clone());
        let c = glwe_encrypt(&f, &gk, 0.0, &mut s).unwrap();
        let phase = glwe_decrypt(&c, &gk).unwrap();
        for h in 0..64 {
            assert_eq!(
                lwe_decrypt(&sample_extract(&triv, h).unwrap(), &flat).unwrap(),
                f.coeffs()[h]
            );
            assert_eq!(
                lwe_decrypt(&sample_extract(&c, h).unwrap(), &flat).unwrap(),
                phase.coeffs()[h]
            );
        }
        assert!(sample_extract(&c, 64).is_err());
    }

    #[test]
    fn sample_extract_k2_and_linearity() {
        let gk = GlweSecretKey::from_polys(vec![
            (0..16).map(|i| (i % 3 == 0) as u8).collect(),
            (0..16).map(|i| (i % 2) as u8).collect(),
        ])
        .unwrap();
        let flat = flatten_key(&gk);
        let mut s = Sampler::new(4);
        let c1 = glwe_encrypt(&s.uniform_poly(16), &gk, 0.0, &mut s).unwrap();
        let c2 = glwe_encrypt(&s.uniform_poly(16), &gk, 0.0, &mut s).unwrap();
        let mut sum = c1.clone();
        sum.add_assign(&c2);
        let ph = glwe_decrypt(&c1, &gk).unwrap();
        for h in 0..16 {
            let e1 = sample_extract(&c1, h).unwrap();
            assert_eq!(lwe_decrypt(&e1, &flat).unwrap(), ph.coeffs()[h]);
            let e2 = sample_extract(&c2, h).unwrap();
            assert_eq!(sample_extract(&sum, h).unwrap(), lwe_add(&e1, &e2).unwrap());
        }
    }

    fn noiseless_keys(prm: &TfheParams, lwe_bits: Vec<u8>, seed: u64) -> (LweSecretKey, GlweSecretKey, BootstrapKey) {
        let (_, gk) = keygen(prm, seed);
        let sk = LweSecretKey::from_bits(lwe_bits).unwrap();
        let bsk = BootstrapKey::generate(prm, &sk, &gk, &mut Sampler::new(seed + 1)).unwrap();
        (sk, gk, bsk)
    }

    fn slots_of(p: &PolyCoeffs, prm: &TfheParams) -> Vec<u64> {
        p.coeffs().iter().map(|&c| decode_slot(c, prm)).collect()
    }

    #[test]
    fn step_selector_behaviour() {
        let prm = small_params(2, 32, 4);
        let (_, gk, bsk) = noiseless_keys(&prm, vec![0, 1], 5);
        let mut s = Sampler::new(6);
        let f = PolyCoeffs((0..32).map(|i| prm.encode(i as u64 % 4).unwrap()).collect());
        let acc = glwe_encrypt(&f, &gk, 0.0, &mut s).unwrap();
        let a = FieldElement::new(Q / 8);
        let t = modswitch_2n(a, 32);
        let slots = |c: &GlweCiphertext| slots_of(&glwe_decrypt(c, &gk).unwrap(), &prm);
        let off = blind_rotate_step(&acc, a, &bsk.elements[0]).unwrap();
        assert_eq!(slots(&off), slots_of(&f, &prm));
        let on = blind_rotate_step(&acc, a, &bsk.elements[1]).unwrap();
        assert_eq!(slots(&on), slots_of(&monomial_rotate(&f, t).unwrap(), &prm));
        let zero = blind_rotate_step(&acc, FieldElement::ZERO, &bsk.elements[1]).unwrap();
        assert_eq!(slots(&zero), slots_of(&f, &prm));
    }

    #[test]
    fn init_rotation_only() {
        let prm = small_params(3, 32, 4);
        let (_, gk, bsk) = noiseless_keys(&prm, vec![1, 1, 0], 7);
        let f = Sampler::new(8).uniform_poly(32);
        let acc = GlweCiphertext::trivial(1, f.clone());
        // body whose switched value is exactly 3
        let b = FieldElement::new((3 * Q as u128 / 64 + 1) as u64);
        assert_eq!(modswitch_2n(b, 32), 3);
        let ct = LweCiphertext::trivial(3, b);
        let out = blind_rotate(&acc, &ct, &bsk).unwrap();
        assert_eq!(glwe_decrypt(&out, &gk).unwrap(), monomial_rotate(&f, 64 - 3).unwrap());
    }

    #[test]
    fn exhaustive_small_blind_rotation() {
        let big_n = 16;
        let n = 2;
        let prm = small_params(n, big_n, 4);
        let mut s = Sampler::new(9);
        let f = PolyCoeffs((0..big_n).map(|i| prm.encode(i as u64 % 4).unwrap()).collect());
        let ct = LweCiphertext {
            mask: s.uniform_vec(n),
            body: s.uniform(),
        };
        for key in 0..4u8 {
            let bits = vec![key & 1, key >> 1];
            let (_, gk, bsk) = noiseless_keys(&prm, bits.clone(), 10 + key as u64);
            let acc = glwe_encrypt(&f, &gk, 0.0, &mut s).unwrap();
            let out = glwe_decrypt(&blind_rotate(&acc, &ct, &bsk).unwrap(), &gk).unwrap();
            let mut e = 2 * big_n - modswitch_2n(ct.body, big_n);
            for (a, &b) in ct.mask.iter().zip(&bits) {
                e += b as usize * modswitch_2n(*a, big_n);
            }
            let mono = {
                let e = e % (2 * big_n);
                if e < big_n {
                    PolyCoeffs::monomial(big_n, e)
                } else {
                    PolyCoeffs::monomial(big_n, e - big_n).scale(FieldElement::MINUS_ONE)
                }
            };
            let want = schoolbook_negacyclic_mul(&f, &mono).unwrap();
            assert_eq!(slots_of(&out, &prm), slots_of(&want, &prm), "key {bits:?}");
        }
    }

    #[test]
    fn lut_layout() {
        let prm = TfheParams::toy().with_plaintext_modulus(4);
        let table = [3, 1, 0, 2];
        let lut = build_lut(&table, &prm).unwrap();
        let w = prm.poly_size / 4;
        let body = lut.body.coeffs();
        let d = prm.delta();
        // coefficient t reads table[round(t / w)]
        for t in 0..prm.poly_size - w / 2 {
            let m = (t + w / 2) / w;
            assert_eq!(body[t].value(), d * table[m]);
        }
        for t in prm.poly_size - w / 2..prm.poly_size {
            assert_eq!(body[t], fe_neg(FieldElement::new(d * table[0])));
        }
        assert!(build_lut(&[1, 2], &prm).is_err());
    }

    #[test]
    fn noiseless_pbs_on_toy_params() {
        let prm = TfheParams::toy().with_sigma(0.0, 0.0);
        let (sk, gk) = keygen(&prm, 11);
        let flat = flatten_key(&gk);
        let bsk = BootstrapKey::generate(&prm, &sk, &gk, &mut Sampler::new(12)).unwrap();
        let mut s = Sampler::new(13);
        let p = prm.plaintext_modulus;
        let table: Vec<u64> = (0..p).map(|m| (3 * m + 1) % p).collect();
        let lut = build_lut(&table, &prm).unwrap();
        for m in 0..p {
            let ct = lwe_encrypt(prm.encode(m).unwrap(), &sk, 0.0, &mut s);
            let out = pbs(&ct, &lut, &bsk, 0).unwrap();
            assert_eq!(
                decode(lwe_decrypt(&out, &flat).unwrap(), &prm).unwrap(),
                table[m as usize]
            );
        }
    }

    #[test]
    fn extract_index_matches_shifted_lut() {
        let prm = TfheParams::toy();
        let (sk, gk) = keygen(&prm, 14);
        let flat = flatten_key(&gk);
        let bsk = BootstrapKey::generate(&prm, &sk, &gk, &mut Sampler::new(15)).unwrap();
        let mut s = Sampler::new(16);
        let p = prm.plaintext_modulus;
        let table: Vec<u64> = (0..p).map(|m| p - 1 - m).collect();
        let lut = build_lut(&table, &prm).unwrap();
        let shifted = lut.rotate(1).unwrap();
        for m in 0..p {
            let ct = lwe_encrypt(prm.encode(m).unwrap(), &sk, prm.sigma, &mut s);
            let a = decode(lwe_decrypt(&pbs(&ct, &lut, &bsk, 0).unwrap(), &flat).unwrap(), &prm).unwrap();
            let b = decode(lwe_decrypt(&pbs(&ct, &shifted, &bsk, 1).unwrap(), &flat).unwrap(), &prm).unwrap();
            assert_eq!(a, table[m as usize]);
            assert_eq!(a, b);
        }
        assert!(pbs(&LweCiphertext::zero(3), &lut, &bsk, 0).is_err());
    }
}
