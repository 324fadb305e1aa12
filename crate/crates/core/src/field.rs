//! Arithmetic in `Z_q` for the Solinas prime `q = 2^64 - 2^32 + 1`.
//!
//! Products are reduced with the segment identity `2^96 ≡ -1` and
//! `2^64 ≡ 2^32 - 1`: a 128-bit value `a·2^96 + b·2^64 + c·2^32 + d` with
//! 32-bit limbs is congruent to `(c·2^32 + d) - a + b·(2^32 - 1)`. No division is
//! involved anywhere in this module.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// The modulus `2^64 - 2^32 + 1`.
pub const Q: u64 = 0xFFFF_FFFF_0000_0001;

/// Fixed generator of the multiplicative group `Z_q^*`.
pub const GENERATOR: u64 = 7;

/// Prime factors of `q - 1 = 2^32 · 3 · 5 · 17 · 257 · 65537`.
pub const Q_MINUS_ONE_FACTORS: [u64; 6] = [2, 3, 5, 17, 257, 65537];

const LO32: u64 = 0xFFFF_FFFF;

/// A residue modulo [`Q`], always held in canonical form `[0, q)`.
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct FieldElement(u64);

impl TryFrom<u64> for FieldElement {
    type Error = String;

    fn try_from(v: u64) -> std::result::Result<Self, String> {
        Self::from_canonical(v).ok_or_else(|| format!("{v} is not a canonical residue"))
    }
}

impl From<FieldElement> for u64 {
    fn from(x: FieldElement) -> u64 {
        x.0
    }
}

/// An unreduced 128-bit product.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WideProduct(pub u128);

impl WideProduct {
    /// The four 32-bit limbs `(a, b, c, d)` from most to least significant.
    #[inline]
    pub fn limbs(self) -> (u64, u64, u64, u64) {
        let v = self.0;
        (
            (v >> 96) as u64,
            ((v >> 64) as u64) & LO32,
            ((v >> 32) as u64) & LO32,
            (v as u64) & LO32,
        )
    }
}

impl FieldElement {
    pub const ZERO: Self = Self(0);
    pub const ONE: Self = Self(1);
    /// `q - 1`, i.e. `-1`.
    pub const MINUS_ONE: Self = Self(Q - 1);

    /// Reduces an arbitrary `u64` (at most one subtraction is needed).
    #[inline]
    pub const fn new(v: u64) -> Self {
        if v >= Q {
            Self(v - Q)
        } else {
            Self(v)
        }
    }

    /// Wraps a value already known to be canonical.
    #[inline]
    pub fn from_canonical(v: u64) -> Option<Self> {
        (v < Q).then_some(Self(v))
    }

    /// Maps a signed integer to its residue (`-d` becomes `q - d`).
    #[inline]
    pub fn from_i64(v: i64) -> Self {
        if v >= 0 {
            Self::new(v as u64)
        } else {
            -Self::new(v.unsigned_abs())
        }
    }

    #[inline]
    pub const fn value(self) -> u64 {
        self.0
    }

    /// Centered representative in `(-q/2, q/2]`.
    #[inline]
    pub fn centered(self) -> i64 {
        if self.0 > Q / 2 {
            -((Q - self.0) as i64)
        } else {
            self.0 as i64
        }
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Square-and-multiply exponentiation.
    pub fn pow(self, mut e: u64) -> Self {
        let mut base = self;
        let mut acc = Self::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = fe_mul(acc, base);
            }
            base = fe_mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via Fermat, `x^(q-2)`.
    pub fn inv(self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::NonInvertibleZero);
        }
        Ok(self.pow(Q - 2))
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fq({})", self.0)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl From<u32> for FieldElement {
    fn from(v: u32) -> Self {
        Self(v as u64)
    }
}

/// Simple reduction: one conditional subtraction of `q`.
#[inline]
pub fn fe_add(x: FieldElement, y: FieldElement) -> FieldElement {
    let (sum, carry) = x.0.overflowing_add(y.0);
    if carry || sum >= Q {
        FieldElement(sum.wrapping_sub(Q))
    } else {
        FieldElement(sum)
    }
}

/// Simple reduction: one conditional addition of `q`.
#[inline]
pub fn fe_sub(x: FieldElement, y: FieldElement) -> FieldElement {
    let (diff, borrow) = x.0.overflowing_sub(y.0);
    if borrow {
        FieldElement(diff.wrapping_add(Q))
    } else {
        FieldElement(diff)
    }
}

#[inline]
pub fn fe_neg(x: FieldElement) -> FieldElement {
    if x.0 == 0 {
        x
    } else {
        FieldElement(Q - x.0)
    }
}

/// Full reduction of a 128-bit value by segment recombination.
///
/// Grouped as `(c·2^32 + d) - a + b·(2^32 - 1)`. Subtracting the top limb
/// may borrow, and adding `(b << 32) - b` may carry; both are worth
/// `2^64 ≡ 2^32 - 1`. On any path at most two conditional corrections fire:
/// the borrow fix, then exactly one of the carry fix or the final `- q`.
#[inline]
pub fn reduce128(v: WideProduct) -> FieldElement {
    let (a, b, c, d) = v.limbs();
    let lo = (c << 32) | d;

    let (mut t, borrow) = lo.overflowing_sub(a);
    if borrow {
        // t wrapped to lo - a + 2^64 ≥ 2^64 - 2^32, so this cannot underflow
        t = t.wrapping_sub(LO32);
    }
    let (r, carry) = t.overflowing_add((b << 32) - b);
    if carry {
        // r < (b << 32) - b ≤ 2^64 - 2^33 + 1, so r + 2^32 - 1 < q
        FieldElement(r.wrapping_add(LO32))
    } else if r >= Q {
        FieldElement(r - Q)
    } else {
        FieldElement(r)
    }
}

#[inline]
pub fn fe_mul(x: FieldElement, y: FieldElement) -> FieldElement {
    reduce128(WideProduct(x.0 as u128 * y.0 as u128))
}

/// Exact 128-bit product via two levels of Karatsuba splitting.
///
/// Each level replaces four half-width products by three; the leaves are at
/// most 18-bit multiplications.
pub fn karatsuba_mul(x: FieldElement, y: FieldElement) -> WideProduct {
    WideProduct(karatsuba(x.0 as u128, y.0 as u128, 64, 2))
}

fn karatsuba(x: u128, y: u128, bits: u32, depth: u32) -> u128 {
    if depth == 0 {
        return x * y;
    }
    let half = bits / 2;
    let mask = (1u128 << half) - 1;
    let (x1, x0) = (x >> half, x & mask);
    let (y1, y0) = (y >> half, y & mask);
    let hi = karatsuba(x1, y1, bits - half, depth - 1);
    let lo = karatsuba(x0, y0, half, depth - 1);
    // (x1 + x0)(y1 + y0) carries one extra bit into the middle product
    let mid = karatsuba(x1 + x0, y1 + y0, bits - half + 1, depth - 1) - hi - lo;
    (hi << (2 * half)) + (mid << half) + lo
}

pub fn fe_pow(x: FieldElement, e: u64) -> FieldElement {
    x.pow(e)
}

pub fn fe_inv(x: FieldElement) -> Result<FieldElement> {
    x.inv()
}

/// Checks that [`GENERATOR`] has full order `q - 1`.
pub fn generator_is_primitive() -> bool {
    let g = FieldElement(GENERATOR);
    Q_MINUS_ONE_FACTORS
        .iter()
        .all(|&f| g.pow((Q - 1) / f) != FieldElement::ONE)
}

fn assert_generator() {
    static CHECKED: OnceLock<bool> = OnceLock::new();
    let ok = *CHECKED.get_or_init(generator_is_primitive);
    assert!(ok, "fixed generator {GENERATOR} is not primitive mod q");
}

/// Primitive `2N`-th root of unity `ψ = g^((q-1)/(2N))`.
///
/// `ψ^N = -1` and `ψ^(2N) = 1`. Supported for power-of-two `N ≤ 2^31`.
pub fn primitive_root_2n(n: usize) -> Result<FieldElement> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::UnsupportedTransformSize(n));
    }
    let two_n = (n as u64).checked_mul(2).ok_or(Error::UnsupportedTransformSize(n))?;
    if (Q - 1) % two_n != 0 {
        return Err(Error::UnsupportedTransformSize(n));
    }
    assert_generator();
    Ok(FieldElement(GENERATOR).pow((Q - 1) / two_n))
}

impl Add for FieldElement {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        fe_add(self, rhs)
    }
}

impl Sub for FieldElement {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        fe_sub(self, rhs)
    }
}

impl Mul for FieldElement {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        fe_mul(self, rhs)
    }
}

impl Neg for FieldElement {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        fe_neg(self)
    }
}

impl AddAssign for FieldElement {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        *self = fe_add(*self, rhs);
    }
}

impl SubAssign for FieldElement {
    #[inline]
    fn sub_assign(&mut self, rhs: Self) {
        *self = fe_sub(*self, rhs);
    }
}

impl MulAssign for FieldElement {
    #[inline]
    fn mul_assign(&mut self, rhs: Self) {
        *self = fe_mul(*self, rhs);
    }
}

impl std::iter::Sum for FieldElement {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, fe_add)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn big_q() -> BigUint {
        BigUint::from(Q)
    }

    fn oracle_mod(v: u128) -> u64 {
        let r = BigUint::from(v) % big_q();
        r.try_into().unwrap()
    }

    fn fe(v: u64) -> FieldElement {
        FieldElement::new(v)
    }

    #[test]
    fn add_sub_edges() {
        assert_eq!(fe_add(fe(0), fe(0)), fe(0));
        assert_eq!(fe_add(fe(Q - 1), fe(1)), fe(0));
        assert_eq!(fe_add(fe(Q - 1), fe(Q - 1)), fe(Q - 2));
        assert_eq!(fe_sub(fe(5), fe(5)), fe(0));
        assert_eq!(fe_sub(fe(0), fe(1)), fe(Q - 1));
        assert_eq!(fe_neg(fe(0)), fe(0));
    }

    #[test]
    fn reduce_known_powers() {
        assert_eq!(reduce128(WideProduct(1u128 << 64)).value(), (1u64 << 32) - 1);
        assert_eq!(reduce128(WideProduct(1u128 << 96)).value(), Q - 1);
    }

    #[test]
    fn reduce_edge_set_matches_oracle() {
        let q = Q as u128;
        let edges = [
            0u128,
            1,
            q,
            q - 1,
            q + 1,
            (1u128 << 64) - 1,
            1u128 << 64,
            1u128 << 96,
            (1u128 << 96) - 1,
            u128::MAX,
            q * q,
            (q - 1) * (q - 1),
            ((1u128 << 32) - 1) << 96,
        ];
        for v in edges {
            assert_eq!(reduce128(WideProduct(v)).value(), oracle_mod(v), "v = {v:#x}");
        }
    }

    #[test]
    fn reduce_limb_grid_covers_borrow_and_carry_paths() {
        let vals = [0u128, 1, 2, 1 << 31, (1 << 32) - 2, (1 << 32) - 1];
        for &a in &vals {
            for &b in &vals {
                for &c in &vals {
                    for &d in &vals {
                        let v = a << 96 | b << 64 | c << 32 | d;
                        assert_eq!(reduce128(WideProduct(v)).value(), oracle_mod(v), "v = {v:#x}");
                    }
                }
            }
        }
    }

    #[test]
    fn random_ops_match_big_integer_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xF1E1D);
        let q = big_q();
        for _ in 0..200_000 {
            let x = rng.random_range(0..Q);
            let y = rng.random_range(0..Q);
            let (bx, by) = (BigUint::from(x), BigUint::from(y));
            let sum: u64 = ((&bx + &by) % &q).try_into().unwrap();
            let diff: u64 = ((&bx + &q - &by) % &q).try_into().unwrap();
            let prod: u64 = ((&bx * &by) % &q).try_into().unwrap();
            assert_eq!(fe_add(fe(x), fe(y)).value(), sum);
            assert_eq!(fe_sub(fe(x), fe(y)).value(), diff);
            assert_eq!(fe_mul(fe(x), fe(y)).value(), prod);
            let v: u128 = rng.random();
            assert_eq!(reduce128(WideProduct(v)).value(), oracle_mod(v));
        }
    }

    #[test]
    fn mul_examples() {
        assert_eq!(fe_mul(fe(1), fe(12345)), fe(12345));
        assert_eq!(fe_mul(fe(1 << 32), fe(1 << 32)).value(), (1u64 << 32) - 1);
    }

    #[test]
    fn karatsuba_examples() {
        assert_eq!(karatsuba_mul(fe(0), fe(987654321)).0, 0);
        let x = fe((1 << 32) + 1);
        assert_eq!(karatsuba_mul(x, x).0, (1u128 << 64) + (1u128 << 33) + 1);
        assert_eq!(karatsuba_mul(fe(Q - 1), fe(Q - 1)).0, (Q - 1) as u128 * (Q - 1) as u128);
    }

    #[test]
    fn pow_inv_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        assert_eq!(fe(7).pow(Q - 1), FieldElement::ONE);
        for _ in 0..1000 {
            let x = fe(rng.random_range(1..Q));
            assert_eq!(x.pow(0), FieldElement::ONE);
            assert_eq!(x.pow(2), x * x);
            assert_eq!(x * x.inv().unwrap(), FieldElement::ONE);
        }
        assert_eq!(fe(1).inv().unwrap(), fe(1));
        assert_eq!(fe(Q - 1).inv().unwrap(), fe(Q - 1));
        assert_eq!(fe(0).inv(), Err(Error::NonInvertibleZero));
    }

    #[test]
    fn generator_verified_against_all_factors() {
        // q - 1 factorisation itself
        let prod = Q_MINUS_ONE_FACTORS[1..].iter().product::<u64>() << 32;
        assert_eq!(prod, Q - 1);
        assert!(generator_is_primitive());
        // a non-generator must fail the same check: 7^2 has order (q-1)/2
        let g2 = fe(GENERATOR).pow(2);
        assert_eq!(g2.pow((Q - 1) / 2), FieldElement::ONE);
    }

    #[test]
    fn primitive_roots_have_exact_order() {
        assert_eq!(primitive_root_2n(1).unwrap(), FieldElement::MINUS_ONE);
        for log_n in 0..=6 {
            let n = 1usize << log_n;
            let psi = primitive_root_2n(n).unwrap();
            for k in 1..2 * n as u64 {
                assert_ne!(psi.pow(k), FieldElement::ONE, "N={n} k={k}");
            }
            assert_eq!(psi.pow(2 * n as u64), FieldElement::ONE);
        }
        for log_n in 7..=31 {
            let n = 1usize << log_n;
            assert_eq!(primitive_root_2n(n).unwrap().pow(n as u64), FieldElement::MINUS_ONE);
        }
        assert_eq!(primitive_root_2n(3), Err(Error::UnsupportedTransformSize(3)));
        assert_eq!(primitive_root_2n(0), Err(Error::UnsupportedTransformSize(0)));
        assert!(primitive_root_2n(1 << 32).is_err());
    }

    #[test]
    fn centered_and_signed_conversion() {
        assert_eq!(FieldElement::from_i64(-3).value(), Q - 3);
        assert_eq!(FieldElement::from_i64(-3).centered(), -3);
        assert_eq!(fe(Q / 2).centered(), (Q / 2) as i64);
        assert_eq!(fe(Q / 2 + 1).centered(), -((Q / 2) as i64));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]

        #[test]
        fn karatsuba_equals_direct(x in 0..Q, y in 0..Q) {
            prop_assert_eq!(karatsuba_mul(fe(x), fe(y)).0, x as u128 * y as u128);
        }

        #[test]
        fn ring_laws(x in 0..Q, y in 0..Q, z in 0..Q) {
            let (x, y, z) = (fe(x), fe(y), fe(z));
            prop_assert_eq!(x * y, y * x);
            prop_assert_eq!((x * y) * z, x * (y * z));
            prop_assert_eq!(x * (y + z), x * y + x * z);
            prop_assert_eq!(x - y + y, x);
        }

        #[test]
        fn reduce_is_canonical(v in any::<u128>()) {
            let r = reduce128(WideProduct(v));
            prop_assert!(r.value() < Q);
            prop_assert_eq!(r.value(), oracle_mod(v));
        }
    }
}
