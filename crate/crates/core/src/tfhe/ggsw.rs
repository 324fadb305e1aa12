use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldElement;
use crate::ntt::{Ntt, PolyCoeffs, PolyNtt};
use crate::tfhe::decomp::{DecompParams, Decomposer};
use crate::tfhe::glwe::{glwe_encrypt, GlweCiphertext};
use crate::tfhe::keys::GlweSecretKey;
use crate::tfhe::sampler::Sampler;

/// `ℓ` GLWE ciphertexts, level `j` carrying `round(q/β^j)·m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlevCiphertext {
    pub levels: Vec<GlweCiphertext>,
}

/// `k + 1` GLev rows; row `r < k` multiplies mask `r`, the last row the body.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GgswCiphertext {
    pub rows: Vec<GlevCiphertext>,
    pub decomp: DecompParams,
}

impl GgswCiphertext {
    /// GGSW of the scalar `m` under `key`.
    pub fn encrypt(
        m: FieldElement,
        key: &GlweSecretKey,
        decomp: DecompParams,
        sigma: f64,
        sampler: &mut Sampler,
    ) -> Result<Self> {
        let k = key.glwe_dim();
        let n = key.poly_size();
        let zero = PolyCoeffs::zero(n);
        let gadgets = decomp.gadgets();
        let mut rows = Vec::with_capacity(k + 1);
        for r in 0..=k {
            let mut levels = Vec::with_capacity(decomp.ell);
            for &g in &gadgets {
                let mut ct = glwe_encrypt(&zero, key, sigma, sampler)?;
                let c0 = &mut ct.component_mut(r).0[0];
                *c0 += m * FieldElement::new(g);
                levels.push(ct);
            }
            rows.push(GlevCiphertext { levels });
        }
        Ok(Self { rows, decomp })
    }

    pub fn glwe_dim(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn poly_size(&self) -> usize {
        self.rows[0].levels[0].poly_size()
    }

    /// Forward transform of every polynomial, pre-multiplied by `N^{-1}`.
    pub fn to_ntt(&self) -> Result<GgswNtt> {
        let n = self.poly_size();
        let ntt = Ntt::new(n)?;
        let n_inv = ntt.table().size_inv();
        let mut polys = Vec::with_capacity((self.glwe_dim() + 1).pow(2) * self.decomp.ell);
        for row in &self.rows {
            for level in &row.levels {
                for p in level.polys() {
                    polys.push(ntt.forward(&p.scale(n_inv))?);
                }
            }
        }
        Ok(GgswNtt {
            polys,
            glwe_dim: self.glwe_dim(),
            poly_size: n,
            decomp: self.decomp,
        })
    }
}

/// Evaluation-domain GGSW with the inverse-transform scale folded in.
///
/// Polynomials are stored flat in `(row, level, component)` order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GgswNtt {
    pub polys: Vec<PolyNtt>,
    pub glwe_dim: usize,
    pub poly_size: usize,
    pub decomp: DecompParams,
}

impl GgswNtt {
    #[inline]
    pub fn get(&self, row: usize, level: usize, component: usize) -> &PolyNtt {
        let k1 = self.glwe_dim + 1;
        &self.polys[(row * self.decomp.ell + level) * k1 + component]
    }

    /// Undo the transform with an unscaled inverse; recovers the
    /// coefficient-domain ciphertext exactly.
    pub fn to_coefficients(&self) -> Result<GgswCiphertext> {
        let ntt = Ntt::new(self.poly_size)?;
        let k1 = self.glwe_dim + 1;
        let mut it = self.polys.iter();
        let mut rows = Vec::with_capacity(k1);
        for _ in 0..k1 {
            let mut levels = Vec::with_capacity(self.decomp.ell);
            for _ in 0..self.decomp.ell {
                let mut comps = Vec::with_capacity(k1);
                for _ in 0..k1 {
                    comps.push(ntt.inverse_unscaled(it.next().expect("shape"))?);
                }
                let body = comps.pop().expect("k + 1 ≥ 1");
                levels.push(GlweCiphertext { mask: comps, body });
            }
            rows.push(GlevCiphertext { levels });
        }
        Ok(GgswCiphertext {
            rows,
            decomp: self.decomp,
        })
    }
}

/// Pairwise reduction; depth is `⌈log2 len⌉`.
pub fn adder_tree(mut terms: Vec<PolyNtt>) -> PolyNtt {
    assert!(!terms.is_empty(), "adder tree needs at least one term");
    while terms.len() > 1 {
        let mut next = Vec::with_capacity(terms.len().div_ceil(2));
        let mut it = terms.into_iter();
        while let Some(mut a) = it.next() {
            if let Some(b) = it.next() {
                a.add_assign(&b);
            }
            next.push(a);
        }
        terms = next;
    }
    terms.pop().expect("non-empty")
}

pub fn adder_tree_depth(terms: usize) -> u32 {
    terms.next_power_of_two().trailing_zeros()
}

/// `C ⊡ G`: decompose, transform, multiply, accumulate, unscaled inverse.
pub fn external_product(c: &GlweCiphertext, g: &GgswNtt) -> Result<GlweCiphertext> {
    let k = g.glwe_dim;
    let n = g.poly_size;
    c.check_shape(k, n)?;
    let ntt = Ntt::new(n)?;
    let dec = Decomposer::new(g.decomp);
    let ell = g.decomp.ell;

    let mut digits = Vec::with_capacity((k + 1) * ell);
    for poly in c.polys() {
        for d in dec.decompose_poly(poly) {
            let mut v = d.0;
            ntt.forward_in_place(&mut v);
            digits.push(PolyNtt(v));
        }
    }

    let mut out = GlweCiphertext::zero(k, n);
    for comp in 0..=k {
        let products = digits
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let key = g.get(i / ell, i % ell, comp);
                PolyNtt(d.0.iter().zip(&key.0).map(|(&x, &y)| x * y).collect())
            })
            .collect();
        let mut acc = adder_tree(products).0;
        ntt.inverse_unscaled_in_place(&mut acc);
        *out.component_mut(comp) = PolyCoeffs(acc);
    }
    Ok(out)
}

/// Selects `c0` or `c1` by the bit in `g`: `c0 + (c1 − c0) ⊡ G`.
pub fn cmux(g: &GgswNtt, c0: &GlweCiphertext, c1: &GlweCiphertext) -> Result<GlweCiphertext> {
    if c0.glwe_dim() != c1.glwe_dim() || c0.poly_size() != c1.poly_size() {
        return Err(Error::LengthMismatch {
            expected: c0.poly_size(),
            actual: c1.poly_size(),
        });
    }
    let mut diff = c1.clone();
    diff.sub_assign(c0);
    let mut out = external_product(&diff, g)?;
    out.add_assign(c0);
    Ok(out)
}
