//! Negacyclic number theoretic transform over `Z_q[X]/(X^N + 1)`.
//!
//! The forward transform is a Cooley-Tukey network taking normal-ordered
//! coefficients to bit-reversed evaluations at the odd powers `ψ^(2k+1)`;
//! the inverse is the mirrored Gentleman-Sande network taking bit-reversed
//! input back to normal order, followed by the `N^{-1}` scale.
//!
//! [`stages`] holds the separate hardware accounting (streamed stages,
//! buffers, cycles) used by the cost model.

pub mod stages;

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::field::{fe_add, fe_mul, fe_sub, primitive_root_2n, FieldElement};

pub use stages::{ntt_cycle_model, stage_schedule, NttTiming, StageInfo, StageKind, StageModel};

/// Transform size and streaming throughput (coefficients per cycle).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct NttConfig {
    size: usize,
    throughput: usize,
}

impl NttConfig {
    pub fn new(size: usize, throughput: usize) -> Result<Self> {
        if size < 2 || !size.is_power_of_two() || (crate::field::Q - 1) % (2 * size as u64) != 0 {
            return Err(Error::UnsupportedTransformSize(size));
        }
        if throughput < 2 || !throughput.is_power_of_two() || throughput > size {
            return Err(Error::InvalidThroughput { throughput, size });
        }
        Ok(Self { size, throughput })
    }

    /// A configuration for functional use where the throughput is irrelevant.
    pub fn functional(size: usize) -> Result<Self> {
        Self::new(size, 2)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn throughput(&self) -> usize {
        self.throughput
    }

    pub fn log_size(&self) -> u32 {
        self.size.trailing_zeros()
    }
}

/// Polynomial in coefficient form, index = degree.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PolyCoeffs(pub Vec<FieldElement>);

/// Polynomial in the evaluation domain, bit-reversed index order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PolyNtt(pub Vec<FieldElement>);

impl PolyCoeffs {
    pub fn zero(n: usize) -> Self {
        Self(vec![FieldElement::ZERO; n])
    }

    /// The monomial `X^degree`.
    pub fn monomial(n: usize, degree: usize) -> Self {
        let mut p = Self::zero(n);
        p.0[degree] = FieldElement::ONE;
        p
    }

    pub fn from_u64s(values: &[u64]) -> Self {
        Self(values.iter().map(|&v| FieldElement::new(v)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.0
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a = fe_add(*a, *b);
        }
    }

    pub fn sub_assign(&mut self, other: &Self) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a = fe_sub(*a, *b);
        }
    }

    pub fn scale(&self, s: FieldElement) -> Self {
        Self(self.0.iter().map(|&c| fe_mul(c, s)).collect())
    }
}

impl PolyNtt {
    pub fn zero(n: usize) -> Self {
        Self(vec![FieldElement::ZERO; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[FieldElement] {
        &self.0
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a = fe_add(*a, *b);
        }
    }

    pub fn scale(&self, s: FieldElement) -> Self {
        Self(self.0.iter().map(|&c| fe_mul(c, s)).collect())
    }
}

/// `log_bits`-bit reversal of `i`.
#[inline]
pub fn bit_reverse(i: usize, log_bits: u32) -> usize {
    if log_bits == 0 {
        0
    } else {
        i.reverse_bits() >> (usize::BITS - log_bits)
    }
}

/// Powers of `ψ` and `ψ^{-1}` in bit-reversed order plus `N^{-1}`.
///
/// Stage `s` of the forward network reads `forward[2^s .. 2^(s+1)]`; the
/// inverse network reads the same ranges of `inverse` in reverse stage order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwiddleTable {
    size: usize,
    psi: FieldElement,
    forward: Vec<FieldElement>,
    inverse: Vec<FieldElement>,
    size_inv: FieldElement,
}

impl TwiddleTable {
    pub fn new(size: usize) -> Result<Self> {
        if size < 2 {
            return Err(Error::UnsupportedTransformSize(size));
        }
        let psi = primitive_root_2n(size)?;
        let psi_inv = psi.inv()?;
        let log_n = size.trailing_zeros();
        let mut forward = vec![FieldElement::ZERO; size];
        let mut inverse = vec![FieldElement::ZERO; size];
        let (mut p, mut pi) = (FieldElement::ONE, FieldElement::ONE);
        for i in 0..size {
            let r = bit_reverse(i, log_n);
            forward[r] = p;
            inverse[r] = pi;
            p = fe_mul(p, psi);
            pi = fe_mul(pi, psi_inv);
        }
        let size_inv = FieldElement::new(size as u64).inv()?;
        Ok(Self {
            size,
            psi,
            forward,
            inverse,
            size_inv,
        })
    }

    /// Shared table for `size`, built once per process.
    pub fn shared(size: usize) -> Result<Arc<Self>> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<TwiddleTable>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(t) = guard.get(&size) {
            return Ok(Arc::clone(t));
        }
        let t = Arc::new(Self::new(size)?);
        guard.insert(size, Arc::clone(&t));
        Ok(t)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn psi(&self) -> FieldElement {
        self.psi
    }

    /// `ψ^2`, the primitive `N`-th root.
    pub fn omega(&self) -> FieldElement {
        fe_mul(self.psi, self.psi)
    }

    pub fn size_inv(&self) -> FieldElement {
        self.size_inv
    }

    pub fn forward_stage(&self, stage: u32) -> &[FieldElement] {
        let lo = 1usize << stage;
        &self.forward[lo..2 * lo]
    }

    pub fn inverse_stage(&self, stage: u32) -> &[FieldElement] {
        let lo = 1usize << stage;
        &self.inverse[lo..2 * lo]
    }

    pub fn forward(&self) -> &[FieldElement] {
        &self.forward
    }

    pub fn inverse(&self) -> &[FieldElement] {
        &self.inverse
    }

    /// Copy with one forward twiddle perturbed. Negative control for the
    /// self-test: a transform built on this table must disagree with the
    /// schoolbook product.
    #[doc(hidden)]
    pub fn corrupted(&self, index: usize) -> Self {
        let mut t = self.clone();
        let i = index.clamp(1, self.size - 1);
        t.forward[i] = fe_add(t.forward[i], FieldElement::ONE);
        t
    }
}

/// `(a0 + w·a1, a0 - w·a1)`.
#[inline]
pub fn ct_butterfly(a0: FieldElement, a1: FieldElement, w: FieldElement) -> (FieldElement, FieldElement) {
    let t = fe_mul(w, a1);
    (fe_add(a0, t), fe_sub(a0, t))
}

/// `(a0 + a1, (a0 - a1)·w_inv)`.
#[inline]
pub fn gs_butterfly(a0: FieldElement, a1: FieldElement, w_inv: FieldElement) -> (FieldElement, FieldElement) {
    (fe_add(a0, a1), fe_mul(fe_sub(a0, a1), w_inv))
}

/// Transform engine bound to one twiddle table.
#[derive(Clone, Debug)]
pub struct Ntt {
    table: Arc<TwiddleTable>,
}

impl Ntt {
    pub fn new(size: usize) -> Result<Self> {
        Ok(Self {
            table: TwiddleTable::shared(size)?,
        })
    }

    pub fn with_table(table: Arc<TwiddleTable>) -> Self {
        Self { table }
    }

    pub fn size(&self) -> usize {
        self.table.size
    }

    pub fn table(&self) -> &TwiddleTable {
        &self.table
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.table.size {
            return Err(Error::LengthMismatch {
                expected: self.table.size,
                actual: len,
            });
        }
        Ok(())
    }

    /// In-place forward transform: normal order in, bit-reversed out.
    pub fn forward_in_place(&self, a: &mut [FieldElement]) {
        let n = a.len();
        debug_assert_eq!(n, self.table.size);
        let tw = &self.table.forward;
        let mut half = n / 2;
        let mut blocks = 1;
        while blocks < n {
            for (block, chunk) in a.chunks_exact_mut(2 * half).enumerate() {
                let w = tw[blocks + block];
                let (lo, hi) = chunk.split_at_mut(half);
                for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                    let (u, v) = ct_butterfly(*x, *y, w);
                    *x = u;
                    *y = v;
                }
            }
            blocks *= 2;
            half /= 2;
        }
    }

    /// In-place inverse transform without the final `N^{-1}` scale.
    pub fn inverse_unscaled_in_place(&self, a: &mut [FieldElement]) {
        let n = a.len();
        debug_assert_eq!(n, self.table.size);
        let tw = &self.table.inverse;
        let mut half = 1;
        let mut blocks = n / 2;
        while blocks >= 1 {
            for (block, chunk) in a.chunks_exact_mut(2 * half).enumerate() {
                let w = tw[blocks + block];
                let (lo, hi) = chunk.split_at_mut(half);
                for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                    let (u, v) = gs_butterfly(*x, *y, w);
                    *x = u;
                    *y = v;
                }
            }
            blocks /= 2;
            half *= 2;
        }
    }

    pub fn inverse_in_place(&self, a: &mut [FieldElement]) {
        self.inverse_unscaled_in_place(a);
        let s = self.table.size_inv;
        for x in a.iter_mut() {
            *x = fe_mul(*x, s);
        }
    }

    pub fn forward(&self, p: &PolyCoeffs) -> Result<PolyNtt> {
        self.check_len(p.len())?;
        let mut v = p.0.clone();
        self.forward_in_place(&mut v);
        Ok(PolyNtt(v))
    }

    pub fn inverse(&self, v: &PolyNtt) -> Result<PolyCoeffs> {
        self.check_len(v.len())?;
        let mut a = v.0.clone();
        self.inverse_in_place(&mut a);
        Ok(PolyCoeffs(a))
    }

    /// Inverse transform omitting `N^{-1}`; pairs with operands that already
    /// carry the scale.
    pub fn inverse_unscaled(&self, v: &PolyNtt) -> Result<PolyCoeffs> {
        self.check_len(v.len())?;
        let mut a = v.0.clone();
        self.inverse_unscaled_in_place(&mut a);
        Ok(PolyCoeffs(a))
    }

    pub fn negacyclic_mul(&self, a: &PolyCoeffs, b: &PolyCoeffs) -> Result<PolyCoeffs> {
        if a.len() != b.len() {
            return Err(Error::LengthMismatch {
                expected: a.len(),
                actual: b.len(),
            });
        }
        let fa = self.forward(a)?;
        let fb = self.forward(b)?;
        self.inverse(&pointwise_mul(&fa, &fb)?)
    }
}

pub fn forward_ntt(p: &PolyCoeffs, cfg: &NttConfig) -> Result<PolyNtt> {
    Ntt::new(cfg.size())?.forward(p)
}

pub fn inverse_ntt(v: &PolyNtt, cfg: &NttConfig) -> Result<PolyCoeffs> {
    Ntt::new(cfg.size())?.inverse(v)
}

pub fn pointwise_mul(a: &PolyNtt, b: &PolyNtt) -> Result<PolyNtt> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    Ok(PolyNtt(a.0.iter().zip(&b.0).map(|(&x, &y)| fe_mul(x, y)).collect()))
}

/// Product modulo `X^N + 1` through the transform.
pub fn negacyclic_mul(a: &PolyCoeffs, b: &PolyCoeffs) -> Result<PolyCoeffs> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    Ntt::new(a.len())?.negacyclic_mul(a, b)
}

/// Quadratic reference product: full convolution, then `c_i - c_{N+i}`.
pub fn schoolbook_negacyclic_mul(a: &PolyCoeffs, b: &PolyCoeffs) -> Result<PolyCoeffs> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    let n = a.len();
    let mut full = vec![FieldElement::ZERO; 2 * n];
    for (i, &x) in a.0.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, &y) in b.0.iter().enumerate() {
            full[i + j] = fe_add(full[i + j], fe_mul(x, y));
        }
    }
    Ok(PolyCoeffs((0..n).map(|i| fe_sub(full[i], full[n + i])).collect()))
}
