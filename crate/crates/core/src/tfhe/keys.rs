use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldElement;
use crate::ntt::PolyCoeffs;
use crate::tfhe::params::TfheParams;
use crate::tfhe::sampler::Sampler;

/// Binary LWE key.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LweSecretKey {
    bits: Vec<u8>,
}

impl LweSecretKey {
    pub fn from_bits(bits: Vec<u8>) -> Result<Self> {
        if let Some(i) = bits.iter().position(|&b| b > 1) {
            return Err(Error::InvalidParams(format!("key entry {i} is not a bit")));
        }
        Ok(Self { bits })
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// `⟨a, sk⟩ mod q`.
    pub fn dot(&self, a: &[FieldElement]) -> Result<FieldElement> {
        if a.len() != self.bits.len() {
            return Err(Error::LengthMismatch {
                expected: self.bits.len(),
                actual: a.len(),
            });
        }
        Ok(a.iter().zip(&self.bits).filter(|(_, &b)| b == 1).map(|(&x, _)| x).sum())
    }
}

/// `k` binary polynomials of degree `< N`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GlweSecretKey {
    polys: Vec<Vec<u8>>,
}

impl GlweSecretKey {
    pub fn from_polys(polys: Vec<Vec<u8>>) -> Result<Self> {
        let n = polys.first().map_or(0, Vec::len);
        if polys.is_empty() || !n.is_power_of_two() {
            return Err(Error::InvalidParams(
                "GLWE key needs k ≥ 1 power-of-two polynomials".into(),
            ));
        }
        for p in &polys {
            if p.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    actual: p.len(),
                });
            }
            if p.iter().any(|&b| b > 1) {
                return Err(Error::InvalidParams("GLWE key coefficient is not a bit".into()));
            }
        }
        Ok(Self { polys })
    }

    pub fn glwe_dim(&self) -> usize {
        self.polys.len()
    }

    pub fn poly_size(&self) -> usize {
        self.polys[0].len()
    }

    pub fn bit_polys(&self) -> &[Vec<u8>] {
        &self.polys
    }

    pub fn poly(&self, i: usize) -> PolyCoeffs {
        PolyCoeffs(self.polys[i].iter().map(|&b| FieldElement::new(b as u64)).collect())
    }
}

/// Draws `sk ∈ B^n` and `Sk ∈ B[X]^k`, deterministically from `seed`.
pub fn keygen(params: &TfheParams, seed: u64) -> (LweSecretKey, GlweSecretKey) {
    let mut s = Sampler::new(seed);
    let lwe = LweSecretKey {
        bits: s.bits(params.lwe_dim),
    };
    let glwe = GlweSecretKey {
        polys: (0..params.glwe_dim).map(|_| s.bits(params.poly_size)).collect(),
    };
    (lwe, glwe)
}

/// Concatenates the coefficient vectors: bit `iN + j` is coefficient `j` of `S_i`.
pub fn flatten_key(sk: &GlweSecretKey) -> LweSecretKey {
    LweSecretKey {
        bits: sk.polys.concat(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_seed_sensitive() {
        let p = TfheParams::standard();
        let (a, b) = keygen(&p, 5);
        let (c, d) = keygen(&p, 5);
        let (e, _) = keygen(&p, 6);
        assert_eq!((&a, &b), (&c, &d));
        assert_ne!(a, e);
        assert_eq!(a.len(), 500);
        assert_eq!(b.glwe_dim(), 1);
        assert_eq!(b.poly_size(), 1024);
    }

    #[test]
    fn bit_balance() {
        let p = TfheParams::standard();
        let (_, g) = keygen(&p, 99);
        let flat = flatten_key(&g);
        let mean = flat.bits().iter().map(|&b| b as f64).sum::<f64>() / flat.len() as f64;
        assert!((0.4..=0.6).contains(&mean), "{mean}");
    }

    #[test]
    fn flatten_order() {
        let g = GlweSecretKey::from_polys(vec![vec![1, 0, 0, 1], vec![0, 1, 1, 0]]).unwrap();
        assert_eq!(flatten_key(&g).bits(), &[1, 0, 0, 1, 0, 1, 1, 0]);
        let single = GlweSecretKey::from_polys(vec![vec![0, 1, 1, 1]]).unwrap();
        assert_eq!(flatten_key(&single).bits(), &[0, 1, 1, 1]);
    }

    #[test]
    fn rejects_non_binary() {
        assert!(LweSecretKey::from_bits(vec![0, 2]).is_err());
        assert!(GlweSecretKey::from_polys(vec![vec![0, 1, 3, 0]]).is_err());
        assert!(GlweSecretKey::from_polys(vec![vec![0, 1], vec![0]]).is_err());
    }

    #[test]
    fn dot_product() {
        let k = LweSecretKey::from_bits(vec![1, 0, 1]).unwrap();
        let a: Vec<_> = [5u64, 7, 11].iter().map(|&v| FieldElement::new(v)).collect();
        assert_eq!(k.dot(&a).unwrap().value(), 16);
        assert!(k.dot(&a[..2]).is_err());
    }
}
