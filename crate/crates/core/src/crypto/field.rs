//! Constant-time prime-field arithmetic in Montgomery form.
//!
//! [`Fp`] is generic over a [`Modulus`] of at most 224 bits held in four
//! little-endian 64-bit limbs. Both the curve base field and the scalar
//! field of the group are instances of it.

use core::fmt;
use core::marker::PhantomData;
use core::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use rand::{CryptoRng, RngCore};
use subtle::{Choice, ConditionallySelectable, ConstantTimeEq, CtOption};

/// Width of a canonical big-endian field encoding.
pub const FIELD_BYTES: usize = 28;

/// Parameters of a prime modulus `m < 2^224`.
pub trait Modulus: Copy + Clone + Send + Sync + 'static {
    const MODULUS: [u64; 4];
    /// `R^2 mod m` for `R = 2^256`.
    const R2: [u64; 4] = r2(&Self::MODULUS);
    /// `-m^{-1} mod 2^64`.
    const INV: u64 = neg_inv(Self::MODULUS[0]);
    const NAME: &'static str;

    /// Montgomery product `a·b·R^{-1} mod m`; moduli with special shape override this.
    #[inline(always)]
    fn mont_mul(a: &[u64; 4], b: &[u64; 4]) -> [u64; 4] {
        mont_mul_const(a, b, &Self::MODULUS, Self::INV)
    }

    #[inline(always)]
    fn mont_square(a: &[u64; 4]) -> [u64; 4] {
        Self::mont_mul(a, a)
    }
}

#[inline(always)]
pub(crate) const fn adc(a: u64, b: u64, carry: u64) -> (u64, u64) {
    let t = a as u128 + b as u128 + carry as u128;
    (t as u64, (t >> 64) as u64)
}

#[inline(always)]
pub(crate) const fn sbb(a: u64, b: u64, borrow: u64) -> (u64, u64) {
    let t = (a as u128).wrapping_sub(b as u128 + (borrow >> 63) as u128);
    (t as u64, (t >> 64) as u64)
}

#[inline(always)]
pub(crate) const fn mac(acc: u64, a: u64, b: u64, carry: u64) -> (u64, u64) {
    let t = acc as u128 + (a as u128) * (b as u128) + carry as u128;
    (t as u64, (t >> 64) as u64)
}

const fn neg_inv(m0: u64) -> u64 {
    // Newton iteration for m0^{-1} mod 2^64; m0 must be odd.
    let mut inv = 1u64;
    let mut i = 0;
    while i < 6 {
        inv = inv.wrapping_mul(2u64.wrapping_sub(m0.wrapping_mul(inv)));
        i += 1;
    }
    inv.wrapping_neg()
}

const fn geq(a: &[u64; 4], b: &[u64; 4]) -> bool {
    let mut i = 4;
    while i > 0 {
        i -= 1;
        if a[i] != b[i] {
            return a[i] > b[i];
        }
    }
    true
}

const fn sub_raw(a: &[u64; 4], b: &[u64; 4]) -> [u64; 4] {
    let (r0, br) = sbb(a[0], b[0], 0);
    let (r1, br) = sbb(a[1], b[1], br);
    let (r2, br) = sbb(a[2], b[2], br);
    let (r3, _) = sbb(a[3], b[3], br);
    [r0, r1, r2, r3]
}

/// `2^512 mod m` by repeated doubling; only used at compile time.
const fn r2(m: &[u64; 4]) -> [u64; 4] {
    let mut r = [1u64, 0, 0, 0];
    let mut i = 0;
    while i < 512 {
        // m < 2^224 so doubling never overflows four limbs.
        let (r0, c) = adc(r[0], r[0], 0);
        let (r1, c) = adc(r[1], r[1], c);
        let (r2, c) = adc(r[2], r[2], c);
        let (r3, _) = adc(r[3], r[3], c);
        r = [r0, r1, r2, r3];
        if geq(&r, m) {
            r = sub_raw(&r, m);
        }
        i += 1;
    }
    r
}

/// An element of `Z/mZ`, stored as `a·R mod m`.
#[derive(Clone, Copy)]
pub struct Fp<M: Modulus> {
    limbs: [u64; 4],
    _m: PhantomData<M>,
}

impl<M: Modulus> Fp<M> {
    pub const ZERO: Self = Self::from_mont([0; 4]);
    pub const ONE: Self = Self::from_raw_const([1, 0, 0, 0]);

    const fn from_mont(limbs: [u64; 4]) -> Self {
        Self { limbs, _m: PhantomData }
    }

    /// Builds an element from canonical little-endian limbs (`< m`) at compile time.
    pub const fn from_raw_const(limbs: [u64; 4]) -> Self {
        Self::from_mont(mont_mul_const(&limbs, &M::R2, &M::MODULUS, M::INV))
    }

    pub fn from_u64(v: u64) -> Self {
        Self::from_raw_const([v, 0, 0, 0])
    }

    /// Canonical little-endian limbs, out of Montgomery form.
    pub fn to_raw(&self) -> [u64; 4] {
        mont_mul_const(&self.limbs, &[1, 0, 0, 0], &M::MODULUS, M::INV)
    }

    /// Parses a 28-byte big-endian value; `None` unless it is `< m`.
    pub fn from_be_bytes(bytes: &[u8; FIELD_BYTES]) -> CtOption<Self> {
        let mut raw = [0u64; 4];
        for (i, chunk) in bytes.rchunks(8).enumerate() {
            let mut buf = [0u8; 8];
            buf[8 - chunk.len()..].copy_from_slice(chunk);
            raw[i] = u64::from_be_bytes(buf);
        }
        let (_, borrow) = {
            let (_, b) = sbb(raw[0], M::MODULUS[0], 0);
            let (_, b) = sbb(raw[1], M::MODULUS[1], b);
            let (_, b) = sbb(raw[2], M::MODULUS[2], b);
            sbb(raw[3], M::MODULUS[3], b)
        };
        let in_range = Choice::from((borrow >> 63) as u8);
        let v = Self::from_mont(mont_mul_const(&raw, &M::R2, &M::MODULUS, M::INV));
        CtOption::new(v, in_range)
    }

    pub fn to_be_bytes(&self) -> [u8; FIELD_BYTES] {
        let raw = self.to_raw();
        let mut out = [0u8; 32];
        for i in 0..4 {
            out[(3 - i) * 8..(4 - i) * 8].copy_from_slice(&raw[i].to_be_bytes());
        }
        let mut res = [0u8; FIELD_BYTES];
        res.copy_from_slice(&out[4..]);
        res
    }

    pub fn is_zero(&self) -> Choice {
        self.ct_eq(&Self::ZERO)
    }

    /// Low bit of the canonical representative.
    pub fn is_odd(&self) -> Choice {
        Choice::from((self.to_raw()[0] & 1) as u8)
    }

    #[inline]
    pub fn square(&self) -> Self {
        Self::from_mont(M::mont_square(&self.limbs))
    }

    pub fn double(&self) -> Self {
        *self + *self
    }

    /// `self^exp` for a public exponent given as little-endian limbs.
    pub fn pow_vartime(&self, exp: &[u64]) -> Self {
        let mut acc = Self::ONE;
        for limb in exp.iter().rev() {
            for bit in (0..64).rev() {
                acc = acc.square();
                if (limb >> bit) & 1 == 1 {
                    acc *= *self;
                }
            }
        }
        acc
    }

    /// Uniform element by rejection sampling 28-byte strings.
    pub fn random(rng: &mut (impl RngCore + CryptoRng)) -> Self {
        loop {
            let mut bytes = [0u8; FIELD_BYTES];
            rng.fill_bytes(&mut bytes);
            if let Some(v) = Option::from(Self::from_be_bytes(&bytes)) {
                return v;
            }
        }
    }

    /// Multiplicative inverse by Fermat; zero maps to zero.
    pub fn invert(&self) -> CtOption<Self> {
        let exp = sub_raw(&M::MODULUS, &[2, 0, 0, 0]);
        CtOption::new(self.pow_vartime(&exp), !self.is_zero())
    }
}

#[inline(always)]
const fn mont_mul_const(a: &[u64; 4], b: &[u64; 4], m: &[u64; 4], inv: u64) -> [u64; 4] {
    // CIOS Montgomery multiplication, R = 2^256.
    let mut t = [0u64; 6];
    let mut i = 0;
    while i < 4 {
        let mut carry = 0u64;
        let mut j = 0;
        while j < 4 {
            let (lo, hi) = mac(t[j], a[j], b[i], carry);
            t[j] = lo;
            carry = hi;
            j += 1;
        }
        let (lo, hi) = adc(t[4], carry, 0);
        t[4] = lo;
        t[5] = hi;

        let k = t[0].wrapping_mul(inv);
        let (_, mut carry) = mac(t[0], k, m[0], 0);
        let mut j = 1;
        while j < 4 {
            let (lo, hi) = mac(t[j], k, m[j], carry);
            t[j - 1] = lo;
            carry = hi;
            j += 1;
        }
        let (lo, hi) = adc(t[4], carry, 0);
        t[3] = lo;
        t[4] = t[5] + hi;
        t[5] = 0;
        i += 1;
    }
    // t < 2m < 2^256, so t[4] is zero and one conditional subtraction suffices.
    let r = [t[0], t[1], t[2], t[3]];
    let (s0, b) = sbb(r[0], m[0], 0);
    let (s1, b) = sbb(r[1], m[1], b);
    let (s2, b) = sbb(r[2], m[2], b);
    let (s3, b) = sbb(r[3], m[3], b);
    // b is all-ones when r < m.
    [
        (r[0] & b) | (s0 & !b),
        (r[1] & b) | (s1 & !b),
        (r[2] & b) | (s2 & !b),
        (r[3] & b) | (s3 & !b),
    ]
}

impl<M: Modulus> Add for Fp<M> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        let a = &self.limbs;
        let b = &rhs.limbs;
        let (r0, c) = adc(a[0], b[0], 0);
        let (r1, c) = adc(a[1], b[1], c);
        let (r2, c) = adc(a[2], b[2], c);
        let (r3, _) = adc(a[3], b[3], c);
        let m = &M::MODULUS;
        let (s0, br) = sbb(r0, m[0], 0);
        let (s1, br) = sbb(r1, m[1], br);
        let (s2, br) = sbb(r2, m[2], br);
        let (s3, br) = sbb(r3, m[3], br);
        Self::from_mont([
            (r0 & br) | (s0 & !br),
            (r1 & br) | (s1 & !br),
            (r2 & br) | (s2 & !br),
            (r3 & br) | (s3 & !br),
        ])
    }
}

impl<M: Modulus> Sub for Fp<M> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        let a = &self.limbs;
        let b = &rhs.limbs;
        let (r0, br) = sbb(a[0], b[0], 0);
        let (r1, br) = sbb(a[1], b[1], br);
        let (r2, br) = sbb(a[2], b[2], br);
        let (r3, br) = sbb(a[3], b[3], br);
        let m = &M::MODULUS;
        let (s0, c) = adc(r0, m[0] & br, 0);
        let (s1, c) = adc(r1, m[1] & br, c);
        let (s2, c) = adc(r2, m[2] & br, c);
        let (s3, _) = adc(r3, m[3] & br, c);
        Self::from_mont([s0, s1, s2, s3])
    }
}

impl<M: Modulus> Mul for Fp<M> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        Self::from_mont(M::mont_mul(&self.limbs, &rhs.limbs))
    }
}

impl<M: Modulus> Neg for Fp<M> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::ZERO - self
    }
}

impl<M: Modulus> AddAssign for Fp<M> {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<M: Modulus> SubAssign for Fp<M> {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl<M: Modulus> MulAssign for Fp<M> {
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

impl<M: Modulus> ConstantTimeEq for Fp<M> {
    fn ct_eq(&self, other: &Self) -> Choice {
        self.limbs[0].ct_eq(&other.limbs[0])
            & self.limbs[1].ct_eq(&other.limbs[1])
            & self.limbs[2].ct_eq(&other.limbs[2])
            & self.limbs[3].ct_eq(&other.limbs[3])
    }
}

impl<M: Modulus> ConditionallySelectable for Fp<M> {
    fn conditional_select(a: &Self, b: &Self, choice: Choice) -> Self {
        Self::from_mont([
            u64::conditional_select(&a.limbs[0], &b.limbs[0], choice),
            u64::conditional_select(&a.limbs[1], &b.limbs[1], choice),
            u64::conditional_select(&a.limbs[2], &b.limbs[2], choice),
            u64::conditional_select(&a.limbs[3], &b.limbs[3], choice),
        ])
    }
}

impl<M: Modulus> PartialEq for Fp<M> {
    fn eq(&self, other: &Self) -> bool {
        self.ct_eq(other).into()
    }
}

impl<M: Modulus> Eq for Fp<M> {}

impl<M: Modulus> Default for Fp<M> {
    fn default() -> Self {
        Self::ZERO
    }
}

impl<M: Modulus> fmt::Debug for Fp<M> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(0x{})", M::NAME, hex::encode(self.to_be_bytes()))
    }
}

impl<M: Modulus> zeroize::Zeroize for Fp<M> {
    fn zeroize(&mut self) {
        self.limbs.zeroize();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Clone, Copy)]
    struct Small;
    impl Modulus for Small {
        // 2^61 - 1
        const MODULUS: [u64; 4] = [0x1fff_ffff_ffff_ffff, 0, 0, 0];
        const NAME: &'static str = "F61";
    }

    type F = Fp<Small>;
    const P: u128 = 0x1fff_ffff_ffff_ffff;

    #[test]
    fn small_field_matches_u128() {
        let mut x: u64 = 0x1234_5678;
        for _ in 0..1000 {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let a = (x >> 3) as u128 % P;
            let b = (x.rotate_left(17) >> 3) as u128 % P;
            let fa = F::from_u64(a as u64);
            let fb = F::from_u64(b as u64);
            assert_eq!((fa * fb).to_raw()[0] as u128, a * b % P);
            assert_eq!((fa + fb).to_raw()[0] as u128, (a + b) % P);
            assert_eq!((fa - fb).to_raw()[0] as u128, (a + P - b) % P);
            if a != 0 {
                assert_eq!((fa * fa.invert().unwrap()), F::ONE);
            }
        }
    }

    #[test]
    fn neg_of_zero_is_zero() {
        assert_eq!(-F::ZERO, F::ZERO);
        assert!(bool::from(F::ZERO.invert().is_none()));
    }

    #[test]
    fn byte_parse_rejects_modulus() {
        let mut bytes = [0u8; FIELD_BYTES];
        bytes[20..].copy_from_slice(&(P as u64).to_be_bytes());
        assert!(bool::from(F::from_be_bytes(&bytes).is_none()));
        bytes[27] -= 1;
        assert_eq!(F::from_be_bytes(&bytes).unwrap(), F::ZERO - F::ONE);
    }
}
