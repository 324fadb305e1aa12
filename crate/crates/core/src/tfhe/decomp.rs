//! Balanced gadget decomposition against `g_j = round(q / β^j)`.
//!
//! Digits are produced most-significant first on the centred representative,
//! each rounded to nearest so the running remainder stays within `g_j / 2`.
//! That yields `|d_j| ≤ β/2` and a final remainder of at most
//! `round(q / 2β^ℓ)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldElement, Q};
use crate::ntt::PolyCoeffs;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompParams {
    pub log_beta: u32,
    pub ell: usize,
}

impl DecompParams {
    pub const fn new(log_beta: u32, ell: usize) -> Self {
        Self { log_beta, ell }
    }

    pub fn validate(&self) -> Result<()> {
        if self.log_beta == 0 || self.ell == 0 || self.log_beta as usize * self.ell > 64 {
            return Err(Error::InvalidParams(format!(
                "decomposition needs β ≥ 2, ℓ ≥ 1 and ℓ·log β ≤ 64 (log β = {}, ℓ = {})",
                self.log_beta, self.ell
            )));
        }
        Ok(())
    }

    pub fn beta(&self) -> u64 {
        1 << self.log_beta
    }

    /// `round(q / β^j)` for `j` in `1..=ℓ`.
    pub fn gadget(&self, j: usize) -> u64 {
        let shift = self.log_beta as usize * j;
        let q = Q as u128;
        if shift >= 128 {
            return 0;
        }
        let div = 1u128 << shift;
        ((q + div / 2) / div) as u64
    }

    pub fn gadgets(&self) -> Vec<u64> {
        (1..=self.ell).map(|j| self.gadget(j)).collect()
    }

    /// Bound on the reconstruction error, `round(q / 2β^ℓ)`.
    pub fn reconstruction_bound(&self) -> u64 {
        let shift = self.log_beta as usize * self.ell + 1;
        let div = 1u128 << shift;
        ((Q as u128 + div / 2) / div) as u64
    }
}

#[derive(Clone, Debug)]
pub struct Decomposer {
    params: DecompParams,
    gadgets: Vec<i128>,
    shifts: Vec<u32>,
}

impl Decomposer {
    pub fn new(params: DecompParams) -> Self {
        let gadgets = params.gadgets().into_iter().map(|g| g as i128).collect();
        let shifts = (1..=params.ell)
            .map(|j| 64u32.saturating_sub(params.log_beta * j as u32))
            .collect();
        Self {
            params,
            gadgets,
            shifts,
        }
    }

    pub fn params(&self) -> DecompParams {
        self.params
    }

    /// Signed digits of `x`, level 1 first, in `[-β/2, β/2]`.
    #[inline]
    pub fn digits_signed(&self, x: FieldElement, out: &mut [i64]) {
        let mut r = x.centered() as i128;
        for ((d_out, &g), &s) in out.iter_mut().zip(&self.gadgets).zip(&self.shifts) {
            // g ≈ 2^s, so the shift gives the nearest digit up to ±1.
            let mut d = if s == 0 { r } else { (r + (1i128 << (s - 1))) >> s };
            let mut rem = r - d * g;
            while 2 * rem > g {
                d += 1;
                rem -= g;
            }
            while -2 * rem > g {
                d -= 1;
                rem += g;
            }
            *d_out = d as i64;
            r = rem;
        }
    }

    pub fn decompose(&self, x: FieldElement) -> Vec<FieldElement> {
        let mut d = vec![0i64; self.params.ell];
        self.digits_signed(x, &mut d);
        d.into_iter().map(FieldElement::from_i64).collect()
    }

    /// One digit polynomial per level.
    pub fn decompose_poly(&self, p: &PolyCoeffs) -> Vec<PolyCoeffs> {
        let ell = self.params.ell;
        let mut out = vec![PolyCoeffs::zero(p.len()); ell];
        let mut d = vec![0i64; ell];
        for (i, &c) in p.coeffs().iter().enumerate() {
            self.digits_signed(c, &mut d);
            for (level, &dj) in d.iter().enumerate() {
                out[level].0[i] = FieldElement::from_i64(dj);
            }
        }
        out
    }
}

pub fn decompose(x: FieldElement, params: DecompParams) -> Vec<FieldElement> {
    Decomposer::new(params).decompose(x)
}

pub fn decompose_poly(p: &PolyCoeffs, params: DecompParams) -> Vec<PolyCoeffs> {
    Decomposer::new(params).decompose_poly(p)
}

/// `Σ d_j · round(q/β^j)`.
pub fn recompose(digits: &[FieldElement], params: DecompParams) -> FieldElement {
    digits
        .iter()
        .zip(params.gadgets())
        .map(|(&d, g)| d * FieldElement::new(g))
        .sum()
}
