use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{fe_neg, FieldElement};
use crate::ntt::{Ntt, PolyCoeffs};
use crate::tfhe::keys::GlweSecretKey;
use crate::tfhe::sampler::Sampler;

/// `(A_0, …, A_{k-1}, B)` with `B = Σ A_i·S_i + M + E`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GlweCiphertext {
    pub mask: Vec<PolyCoeffs>,
    pub body: PolyCoeffs,
}

impl GlweCiphertext {
    pub fn zero(glwe_dim: usize, poly_size: usize) -> Self {
        Self {
            mask: vec![PolyCoeffs::zero(poly_size); glwe_dim],
            body: PolyCoeffs::zero(poly_size),
        }
    }

    /// Zero mask, body `F`: decrypts to `F` under every key.
    pub fn trivial(glwe_dim: usize, body: PolyCoeffs) -> Self {
        Self {
            mask: vec![PolyCoeffs::zero(body.len()); glwe_dim],
            body,
        }
    }

    pub fn glwe_dim(&self) -> usize {
        self.mask.len()
    }

    pub fn poly_size(&self) -> usize {
        self.body.len()
    }

    /// Mask polynomials followed by the body.
    pub fn polys(&self) -> impl Iterator<Item = &PolyCoeffs> {
        self.mask.iter().chain(std::iter::once(&self.body))
    }

    pub fn polys_mut(&mut self) -> impl Iterator<Item = &mut PolyCoeffs> {
        self.mask.iter_mut().chain(std::iter::once(&mut self.body))
    }

    pub fn component(&self, r: usize) -> &PolyCoeffs {
        if r < self.mask.len() {
            &self.mask[r]
        } else {
            &self.body
        }
    }

    pub fn component_mut(&mut self, r: usize) -> &mut PolyCoeffs {
        if r < self.mask.len() {
            &mut self.mask[r]
        } else {
            &mut self.body
        }
    }

    pub fn check_shape(&self, glwe_dim: usize, poly_size: usize) -> Result<()> {
        if self.mask.len() != glwe_dim {
            return Err(Error::LengthMismatch {
                expected: glwe_dim,
                actual: self.mask.len(),
            });
        }
        for p in self.polys() {
            if p.len() != poly_size {
                return Err(Error::LengthMismatch {
                    expected: poly_size,
                    actual: p.len(),
                });
            }
        }
        Ok(())
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (a, b) in self.polys_mut().zip(other.polys()) {
            a.add_assign(b);
        }
    }

    pub fn sub_assign(&mut self, other: &Self) {
        for (a, b) in self.polys_mut().zip(other.polys()) {
            a.sub_assign(b);
        }
    }

    /// Every component multiplied by `X^t`.
    pub fn rotate(&self, t: usize) -> Result<Self> {
        Ok(Self {
            mask: self.mask.iter().map(|p| monomial_rotate(p, t)).collect::<Result<_>>()?,
            body: monomial_rotate(&self.body, t)?,
        })
    }
}

pub fn glwe_encrypt(
    msg: &PolyCoeffs,
    key: &GlweSecretKey,
    sigma: f64,
    sampler: &mut Sampler,
) -> Result<GlweCiphertext> {
    let n = key.poly_size();
    if msg.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: msg.len(),
        });
    }
    let ntt = Ntt::new(n)?;
    let mut body = sampler.gaussian_poly(n, sigma);
    body.add_assign(msg);
    let mut mask = Vec::with_capacity(key.glwe_dim());
    for i in 0..key.glwe_dim() {
        let a = sampler.uniform_poly(n);
        body.add_assign(&ntt.negacyclic_mul(&a, &key.poly(i))?);
        mask.push(a);
    }
    Ok(GlweCiphertext { mask, body })
}

/// Phase polynomial `B − Σ A_i·S_i`.
pub fn glwe_decrypt(ct: &GlweCiphertext, key: &GlweSecretKey) -> Result<PolyCoeffs> {
    ct.check_shape(key.glwe_dim(), key.poly_size())?;
    let ntt = Ntt::new(key.poly_size())?;
    let mut phase = ct.body.clone();
    for (i, a) in ct.mask.iter().enumerate() {
        phase.sub_assign(&ntt.negacyclic_mul(a, &key.poly(i))?);
    }
    Ok(phase)
}

/// `f · X^t mod (X^N + 1)` for `0 ≤ t < 2N`.
pub fn monomial_rotate(f: &PolyCoeffs, t: usize) -> Result<PolyCoeffs> {
    let n = f.len();
    if t >= 2 * n {
        return Err(Error::IndexOutOfRange { index: t, limit: 2 * n });
    }
    let mut out = vec![FieldElement::ZERO; n];
    rotate_into(f.coeffs(), t, &mut out);
    Ok(PolyCoeffs(out))
}

/// Unchecked rotation into a caller buffer; `t < 2N`.
#[inline]
pub(crate) fn rotate_into(f: &[FieldElement], t: usize, out: &mut [FieldElement]) {
    let n = f.len();
    let (negate_first, shift) = if t >= n { (true, t - n) } else { (false, t) };
    // coefficients i < N − shift move up by `shift`, the rest wrap once
    for (i, &c) in f[..n - shift].iter().enumerate() {
        out[i + shift] = if negate_first { fe_neg(c) } else { c };
    }
    for (i, &c) in f[n - shift..].iter().enumerate() {
        out[i] = if negate_first { c } else { fe_neg(c) };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Q;
    use crate::tfhe::keys::keygen;
    use crate::tfhe::params::TfheParams;

    fn naive_rotate(f: &PolyCoeffs, t: usize) -> PolyCoeffs {
        let n = f.len();
        let mut out = PolyCoeffs::zero(n);
        for (i, &c) in f.coeffs().iter().enumerate() {
            let d = (i + t) % (2 * n);
            if d < n {
                out.0[d] += c;
            } else {
                out.0[d - n] -= c;
            }
        }
        out
    }

    #[test]
    fn rotation_examples() {
        let f = PolyCoeffs::from_u64s(&[1, 2, 3, 4]);
        assert_eq!(monomial_rotate(&f, 0).unwrap(), f);
        assert_eq!(
            monomial_rotate(&f, 4).unwrap(),
            PolyCoeffs::from_u64s(&[Q - 1, Q - 2, Q - 3, Q - 4])
        );
        assert_eq!(
            monomial_rotate(&f, 1).unwrap(),
            PolyCoeffs::from_u64s(&[Q - 4, 1, 2, 3])
        );
        assert!(monomial_rotate(&f, 8).is_err());
        let z = PolyCoeffs::from_u64s(&[0, 5, 0, 0]);
        assert_eq!(
            monomial_rotate(&z, 3).unwrap(),
            PolyCoeffs::from_u64s(&[Q - 5, 0, 0, 0])
        );
    }

    #[test]
    fn rotation_matches_naive_and_multiplication() {
        let mut s = Sampler::new(1);
        let n = 16;
        let f = s.uniform_poly(n);
        for t in 0..2 * n {
            let r = monomial_rotate(&f, t).unwrap();
            assert_eq!(r, naive_rotate(&f, t));
            let mono = if t < n {
                PolyCoeffs::monomial(n, t)
            } else {
                PolyCoeffs::monomial(n, t - n).scale(FieldElement::MINUS_ONE)
            };
            assert_eq!(r, crate::ntt::schoolbook_negacyclic_mul(&f, &mono).unwrap());
        }
    }

    #[test]
    fn encrypt_decrypt() {
        let p = TfheParams::standard();
        let (_, sk) = keygen(&p, 3);
        let mut s = Sampler::new(4);
        let f = s.uniform_poly(p.poly_size);
        let ct = glwe_encrypt(&f, &sk, 0.0, &mut s).unwrap();
        assert_eq!(glwe_decrypt(&ct, &sk).unwrap(), f);

        let triv = GlweCiphertext::trivial(1, f.clone());
        assert_eq!(glwe_decrypt(&triv, &sk).unwrap(), f);
    }

    #[test]
    fn noisy_decode_per_coefficient() {
        let p = TfheParams::standard();
        let (_, sk) = keygen(&p, 5);
        let mut s = Sampler::new(6);
        for _ in 0..100 {
            let ms: Vec<u64> = (0..p.poly_size).map(|_| s.below(16)).collect();
            let f = PolyCoeffs(ms.iter().map(|&m| p.encode(m).unwrap()).collect());
            let ct = glwe_encrypt(&f, &sk, p.sigma, &mut s).unwrap();
            let ph = glwe_decrypt(&ct, &sk).unwrap();
            for (c, &m) in ph.coeffs().iter().zip(&ms) {
                assert_eq!(crate::tfhe::lwe::decode(*c, &p).unwrap(), m);
            }
        }
    }

    #[test]
    fn shape_checks() {
        let p = TfheParams::toy();
        let (_, sk) = keygen(&p, 1);
        let ct = GlweCiphertext::zero(2, p.poly_size);
        assert!(glwe_decrypt(&ct, &sk).is_err());
        assert!(glwe_encrypt(&PolyCoeffs::zero(8), &sk, 0.0, &mut Sampler::new(0)).is_err());
    }
}
