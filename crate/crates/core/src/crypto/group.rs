//! The NIST P-224 prime-order group.
//!
//! Points are kept in Jacobian coordinates `(X, Y, Z)` representing the
//! affine point `(X/Z^2, Y/Z^3)`; `Z = 0` is the identity. All scalar
//! multiplications run in time independent of the scalar.

use core::fmt;
use core::ops::{Add, Neg, Sub};
use std::sync::OnceLock;

use rand::{CryptoRng, RngCore};
use subtle::{Choice, ConditionallySelectable, ConstantTimeEq};

use super::field::{adc, mac, sbb, Fp, Modulus, FIELD_BYTES};

/// Base field of P-224: `p = 2^224 - 2^96 + 1`.
#[derive(Clone, Copy, Debug)]
pub struct P224Base;

impl Modulus for P224Base {
    const MODULUS: [u64; 4] = [
        0x0000000000000001,
        0xffffffff00000000,
        0xffffffffffffffff,
        0x00000000ffffffff,
    ];
    const NAME: &'static str = "Fp224";

    #[inline(always)]
    fn mont_mul(a: &[u64; 4], b: &[u64; 4]) -> [u64; 4] {
        let mut t = [0u64; 8];
        for i in 0..4 {
            let mut carry = 0;
            for j in 0..4 {
                let (lo, hi) = mac(t[i + j], a[i], b[j], carry);
                t[i + j] = lo;
                carry = hi;
            }
            t[i + 4] = carry;
        }
        p224_reduce(t)
    }

    #[inline(always)]
    fn mont_square(a: &[u64; 4]) -> [u64; 4] {
        // off-diagonal products once, doubled, then the squares
        let mut t = [0u64; 8];
        for i in 0..3 {
            let mut carry = 0;
            for j in (i + 1)..4 {
                let (lo, hi) = mac(t[i + j], a[i], a[j], carry);
                t[i + j] = lo;
                carry = hi;
            }
            t[i + 4] = carry;
        }
        let mut top = 0;
        for limb in t.iter_mut() {
            let next = *limb >> 63;
            *limb = (*limb << 1) | top;
            top = next;
        }
        let mut carry = 0;
        for i in 0..4 {
            let (lo, hi) = mac(t[2 * i], a[i], a[i], carry);
            t[2 * i] = lo;
            let (lo, hi2) = adc(t[2 * i + 1], hi, 0);
            t[2 * i + 1] = lo;
            carry = hi2;
        }
        p224_reduce(t)
    }
}

/// Montgomery reduction (`R = 2^256`) specialised to `p = 2^224 - 2^96 + 1`.
///
/// `-p^{-1} ≡ -1 (mod 2^64)`, so each round's multiplier is `k = -t_i` and
/// `k·p = k·2^224 + k - k·2^96` is built from shifts alone.
#[inline(always)]
fn p224_reduce(mut t: [u64; 8]) -> [u64; 4] {
    for i in 0..4 {
        let k = t[i].wrapping_neg();
        // d = k + k·2^224 - k·2^96, five limbs, nonnegative
        let (d0, br) = sbb(k, 0, 0);
        let (d1, br) = sbb(0, k << 32, br);
        let (d2, br) = sbb(0, k >> 32, br);
        let (d3, br) = sbb(k << 32, 0, br);
        let (d4, _) = sbb(k >> 32, 0, br);
        let (v, c) = adc(t[i], d0, 0);
        t[i] = v;
        let (v, c) = adc(t[i + 1], d1, c);
        t[i + 1] = v;
        let (v, c) = adc(t[i + 2], d2, c);
        t[i + 2] = v;
        let (v, c) = adc(t[i + 3], d3, c);
        t[i + 3] = v;
        let (v, mut c) = adc(t[i + 4], d4, c);
        t[i + 4] = v;
        for limb in t.iter_mut().skip(i + 5) {
            let (v, c2) = adc(*limb, 0, c);
            *limb = v;
            c = c2;
        }
    }
    let m = &P224Base::MODULUS;
    let r = [t[4], t[5], t[6], t[7]];
    let (s0, b) = sbb(r[0], m[0], 0);
    let (s1, b) = sbb(r[1], m[1], b);
    let (s2, b) = sbb(r[2], m[2], b);
    let (s3, b) = sbb(r[3], m[3], b);
    [
        (r[0] & b) | (s0 & !b),
        (r[1] & b) | (s1 & !b),
        (r[2] & b) | (s2 & !b),
        (r[3] & b) | (s3 & !b),
    ]
}

/// Scalar field of P-224 (the prime group order).
#[derive(Clone, Copy, Debug)]
pub struct P224Order;

impl Modulus for P224Order {
    const MODULUS: [u64; 4] = [
        0x13dd29455c5c2a3d,
        0xffff16a2e0b8f03e,
        0xffffffffffffffff,
        0x00000000ffffffff,
    ];
    const NAME: &'static str = "Scalar";
}

pub type FieldElement = Fp<P224Base>;
pub type Scalar = Fp<P224Order>;

/// Bytes in a canonical scalar encoding.
pub const SCALAR_BYTES: usize = FIELD_BYTES;
/// Bytes in an x-only point encoding.
pub const POINT_BYTES: usize = FIELD_BYTES;
/// Bytes in a SEC1 compressed point encoding.
pub const COMPRESSED_POINT_BYTES: usize = FIELD_BYTES + 1;

const CURVE_B: FieldElement = FieldElement::from_raw_const([
    0x270b39432355ffb4,
    0x5044b0b7d7bfd8ba,
    0x0c04b3abf5413256,
    0x00000000b4050a85,
]);
const GEN_X: FieldElement = FieldElement::from_raw_const([
    0x343280d6115c1d21,
    0x4a03c1d356c21122,
    0x6bb4bf7f321390b9,
    0x00000000b70e0cbd,
]);
const GEN_Y: FieldElement = FieldElement::from_raw_const([
    0x44d5819985007e34,
    0xcd4375a05a074764,
    0xb5f723fb4c22dfe6,
    0x00000000bd376388,
]);

/// Element of `Z_q^*`.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct NonZeroScalar(Scalar);

impl NonZeroScalar {
    pub fn new(s: Scalar) -> Option<Self> {
        if bool::from(s.is_zero()) {
            None
        } else {
            Some(Self(s))
        }
    }

    pub fn random(rng: &mut (impl RngCore + CryptoRng)) -> Self {
        loop {
            if let Some(s) = Self::new(Scalar::random(rng)) {
                return s;
            }
        }
    }

    pub fn get(&self) -> Scalar {
        self.0
    }
}

impl fmt::Debug for NonZeroScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<NonZeroScalar> for Scalar {
    fn from(s: NonZeroScalar) -> Scalar {
        s.0
    }
}

impl zeroize::Zeroize for NonZeroScalar {
    fn zeroize(&mut self) {
        self.0.zeroize();
    }
}

/// `n^(2^k - 1)` for `k = 127` via an addition chain.
fn pow_2_127_minus_1(n: &FieldElement) -> FieldElement {
    fn sq_n(mut x: FieldElement, n: u32) -> FieldElement {
        for _ in 0..n {
            x = x.square();
        }
        x
    }
    let x1 = *n;
    let x2 = sq_n(x1, 1) * x1;
    let x3 = sq_n(x2, 1) * x1;
    let x6 = sq_n(x3, 3) * x3;
    let x12 = sq_n(x6, 6) * x6;
    let x24 = sq_n(x12, 12) * x12;
    let x48 = sq_n(x24, 24) * x24;
    let x96 = sq_n(x48, 48) * x48;
    let x120 = sq_n(x96, 24) * x24;
    let x126 = sq_n(x120, 6) * x6;
    sq_n(x126, 1) * x1
}

const SYLOW_BITS: usize = 96;
const DIGIT_BITS: usize = 8;
const DIGITS: usize = SYLOW_BITS / DIGIT_BITS;

/// Tables for discrete logs in the order-`2^96` subgroup generated by `g = 11^Q`.
struct SylowTables {
    /// `inv_powers[m][j] = g^(-j · 2^(8m))`
    inv_powers: Vec<[FieldElement; 256]>,
    /// discrete log of each element of the order-256 subgroup `h = g^(2^88)`
    small_log: std::collections::HashMap<[u8; FIELD_BYTES], u8>,
}

fn sylow_tables() -> &'static SylowTables {
    static TABLES: OnceLock<SylowTables> = OnceLock::new();
    TABLES.get_or_init(|| {
        // Q = 2^128 - 1; 11 is the least quadratic non-residue mod p.
        let g = FieldElement::from_u64(11).pow_vartime(&[u64::MAX, u64::MAX]);
        let g_inv = g.invert().expect("nonzero");
        let mut inv_powers = Vec::with_capacity(DIGITS);
        let mut base = g_inv;
        for _ in 0..DIGITS {
            let mut row = [FieldElement::ONE; 256];
            for j in 1..256 {
                row[j] = row[j - 1] * base;
            }
            inv_powers.push(row);
            for _ in 0..DIGIT_BITS {
                base = base.square();
            }
        }
        let mut h = g;
        for _ in 0..(SYLOW_BITS - DIGIT_BITS) {
            h = h.square();
        }
        let mut small_log = std::collections::HashMap::with_capacity(256);
        let mut acc = FieldElement::ONE;
        for j in 0..=255u8 {
            small_log.insert(acc.to_be_bytes(), j);
            acc *= h;
        }
        SylowTables { inv_powers, small_log }
    })
}

/// Square root in the base field, `None` for non-residues.
///
/// `p - 1 = 2^96 · Q` with `Q = 2^128 - 1`. With `w = n^((Q-1)/2)` we have
/// `t = n^Q = w^2 n` in the 2-Sylow subgroup; its discrete log `e` to base
/// `g` is recovered eight bits at a time from precomputed tables, and the
/// root is `n w · g^(-e/2)`. Variable time: only applied to public x-coordinates.
pub fn sqrt_vartime(n: &FieldElement) -> Option<FieldElement> {
    if bool::from(n.is_zero()) {
        return Some(FieldElement::ZERO);
    }
    let tables = sylow_tables();
    let w = pow_2_127_minus_1(n);
    let r = w * *n;
    let t = r * w;

    // powers[k] = t^(2^(88 - 8k))
    let mut powers = [FieldElement::ONE; DIGITS];
    let mut x = t;
    for i in 0..=(SYLOW_BITS - DIGIT_BITS) {
        if i % DIGIT_BITS == 0 {
            powers[DIGITS - 1 - i / DIGIT_BITS] = x;
        }
        x = x.square();
    }

    let mut digits = [0u8; DIGITS];
    for k in 0..DIGITS {
        let mut probe = powers[k];
        for (i, digit) in digits.iter().enumerate().take(k) {
            probe *= tables.inv_powers[i + DIGITS - 1 - k][*digit as usize];
        }
        digits[k] = *tables.small_log.get(&probe.to_be_bytes())?;
    }
    if digits[0] & 1 == 1 {
        return None;
    }
    let e = digits.iter().rev().fold(0u128, |acc, d| (acc << DIGIT_BITS) | *d as u128);
    let half = e >> 1;
    let mut root = r;
    for (m, row) in tables.inv_powers.iter().enumerate() {
        root *= row[((half >> (DIGIT_BITS * m)) & 0xff) as usize];
    }
    if root.square() == *n {
        Some(root)
    } else {
        None
    }
}

/// Affine point with an explicit identity flag; used for precomputed tables.
#[derive(Clone, Copy, Debug)]
struct AffineEntry {
    x: FieldElement,
    y: FieldElement,
    infinity: Choice,
}

impl Default for AffineEntry {
    fn default() -> Self {
        Self { x: FieldElement::ZERO, y: FieldElement::ZERO, infinity: Choice::from(1) }
    }
}

impl ConditionallySelectable for AffineEntry {
    fn conditional_select(a: &Self, b: &Self, choice: Choice) -> Self {
        Self {
            x: FieldElement::conditional_select(&a.x, &b.x, choice),
            y: FieldElement::conditional_select(&a.y, &b.y, choice),
            infinity: Choice::conditional_select(&a.infinity, &b.infinity, choice),
        }
    }
}

/// A point of the group generated by `P`.
#[derive(Clone, Copy)]
pub struct GroupPoint {
    x: FieldElement,
    y: FieldElement,
    z: FieldElement,
}

/// Error decoding a point from bytes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum PointError {
    #[error("bytes do not encode a point on the curve")]
    NotOnCurve,
}

impl GroupPoint {
    pub const IDENTITY: Self = Self {
        x: FieldElement::ONE,
        y: FieldElement::ONE,
        z: FieldElement::ZERO,
    };

    pub fn identity() -> Self {
        Self::IDENTITY
    }

    pub fn generator() -> Self {
        Self { x: GEN_X, y: GEN_Y, z: FieldElement::ONE }
    }

    pub fn is_identity(&self) -> Choice {
        self.z.is_zero()
    }

    fn from_affine(x: FieldElement, y: FieldElement) -> Self {
        Self { x, y, z: FieldElement::ONE }
    }

    /// Affine coordinates, or `None` for the identity.
    pub fn to_affine(&self) -> Option<(FieldElement, FieldElement)> {
        if self.z == FieldElement::ONE {
            return Some((self.x, self.y));
        }
        let zinv = Option::<FieldElement>::from(self.z.invert())?;
        let zinv2 = zinv.square();
        Some((self.x * zinv2, self.y * zinv2 * zinv))
    }

    /// Same point with `z = 1`, so later encodings skip the inversion.
    pub fn normalize(&self) -> Self {
        match self.to_affine() {
            Some((x, y)) => Self::from_affine(x, y),
            None => Self::IDENTITY,
        }
    }

    /// Checks `y^2 = x^3 - 3x + b`.
    pub fn is_on_curve(&self) -> bool {
        match self.to_affine() {
            None => true,
            Some((x, y)) => on_curve(&x, &y),
        }
    }

    pub fn double(&self) -> Self {
        // dbl-2001-b, a = -3
        let delta = self.z.square();
        let gamma = self.y.square();
        let beta = self.x * gamma;
        let t = (self.x - delta) * (self.x + delta);
        let alpha = t.double() + t;
        let beta4 = beta.double().double();
        let x3 = alpha.square() - beta4.double();
        let z3 = (self.y + self.z).square() - gamma - delta;
        let gamma2 = gamma.square();
        let y3 = alpha * (beta4 - x3) - gamma2.double().double().double();
        Self { x: x3, y: y3, z: z3 }
    }

    /// Complete addition: handles `self == other` and identity inputs.
    fn add_jacobian(&self, other: &Self) -> Self {
        let mut out = self.add_distinct(other);
        let same = out.z.is_zero() & !self.is_identity() & !other.is_identity() & self.ct_eq(other);
        out.conditional_assign(&self.double(), same);
        out
    }

    /// Addition assuming `self != other` unless one of them is the identity.
    ///
    /// Inside the window loops the accumulator holds `c · B` where `c` is a
    /// proper prefix of a scalar below `q`, so it never equals `±` the table
    /// entry being added; the doubling case cannot arise there.
    fn add_distinct(&self, other: &Self) -> Self {
        // add-2007-bl
        let z1z1 = self.z.square();
        let z2z2 = other.z.square();
        let u1 = self.x * z2z2;
        let u2 = other.x * z1z1;
        let s1 = self.y * other.z * z2z2;
        let s2 = other.y * self.z * z1z1;
        let h = u2 - u1;
        let i = h.double().square();
        let j = h * i;
        let r = (s2 - s1).double();
        let v = u1 * i;
        let x3 = r.square() - j - v.double();
        let y3 = r * (v - x3) - (s1 * j).double();
        let z3 = ((self.z + other.z).square() - z1z1 - z2z2) * h;
        let mut out = Self { x: x3, y: y3, z: z3 };
        out.conditional_assign(other, self.is_identity());
        out.conditional_assign(self, other.is_identity());
        out
    }

    /// Mixed addition under the same distinctness assumption as [`Self::add_distinct`].
    fn add_mixed(&self, other: &AffineEntry) -> Self {
        // madd-2007-bl
        let z1z1 = self.z.square();
        let u2 = other.x * z1z1;
        let s2 = other.y * self.z * z1z1;
        let h = u2 - self.x;
        let hh = h.square();
        let i = hh.double().double();
        let j = h * i;
        let r = (s2 - self.y).double();
        let v = self.x * i;
        let x3 = r.square() - j - v.double();
        let y3 = r * (v - x3) - (self.y * j).double();
        let z3 = (self.z + h).square() - z1z1 - hh;
        let mut out = Self { x: x3, y: y3, z: z3 };
        out.conditional_assign(&Self::from_affine(other.x, other.y), self.is_identity());
        out.conditional_assign(self, other.infinity);
        out
    }

    /// `s · self`, fixed 4-bit window with a constant-time table scan.
    pub fn mul(&self, s: &Scalar) -> Self {
        let mut table = [Self::IDENTITY; 16];
        table[1] = *self;
        for i in 2..16 {
            table[i] = if i % 2 == 0 { table[i / 2].double() } else { table[i - 1].add_distinct(self) };
        }
        let bytes = s.to_be_bytes();
        let mut acc = Self::IDENTITY;
        for byte in bytes {
            for nibble in [byte >> 4, byte & 0x0f] {
                acc = acc.double().double().double().double();
                let mut pick = Self::IDENTITY;
                for (i, entry) in table.iter().enumerate().skip(1) {
                    pick.conditional_assign(entry, (i as u8).ct_eq(&nibble));
                }
                acc = acc.add_distinct(&pick);
            }
        }
        acc
    }

    /// `s · P` using the precomputed generator table.
    pub fn mul_generator(s: &Scalar) -> Self {
        let table = generator_table();
        let bytes = s.to_be_bytes();
        let mut acc = Self::IDENTITY;
        // Nibble position 0 is least significant.
        for (pos, row) in table.iter().enumerate() {
            let byte = bytes[FIELD_BYTES - 1 - pos / 2];
            let nibble = if pos % 2 == 0 { byte & 0x0f } else { byte >> 4 };
            let mut pick = AffineEntry::default();
            for (i, entry) in row.iter().enumerate().skip(1) {
                pick.conditional_assign(entry, (i as u8).ct_eq(&nibble));
            }
            acc = acc.add_mixed(&pick);
        }
        acc
    }

    /// SEC1 compressed encoding; the identity encodes as `[0; 29]`.
    pub fn to_compressed(&self) -> [u8; COMPRESSED_POINT_BYTES] {
        let mut out = [0u8; COMPRESSED_POINT_BYTES];
        if let Some((x, y)) = self.to_affine() {
            out[0] = 0x02 | u8::from(bool::from(y.is_odd()));
            out[1..].copy_from_slice(&x.to_be_bytes());
        }
        out
    }

    pub fn from_compressed(bytes: &[u8; COMPRESSED_POINT_BYTES]) -> Result<Self, PointError> {
        if bytes.iter().all(|b| *b == 0) {
            return Ok(Self::IDENTITY);
        }
        let odd = match bytes[0] {
            0x02 => false,
            0x03 => true,
            _ => return Err(PointError::NotOnCurve),
        };
        let mut xb = [0u8; FIELD_BYTES];
        xb.copy_from_slice(&bytes[1..]);
        Self::decompress(&xb, odd)
    }

    /// `true` when the affine y-coordinate is even; the identity counts as even.
    pub fn has_even_y(&self) -> bool {
        match self.to_affine() {
            None => true,
            Some((_, y)) => !bool::from(y.is_odd()),
        }
    }

    /// 28-byte x-only encoding. The sender guarantees an even-y, non-identity point.
    pub fn to_x_bytes(&self) -> [u8; POINT_BYTES] {
        let affine = self.to_affine();
        debug_assert!(affine.is_some(), "x-only encoding of the identity");
        debug_assert!(self.has_even_y(), "x-only encoding of an odd-y point");
        affine.map(|(x, _)| x.to_be_bytes()).unwrap_or([0u8; POINT_BYTES])
    }

    /// Reconstructs the even-y point with the given x-coordinate.
    pub fn from_x_bytes(bytes: &[u8; POINT_BYTES]) -> Result<Self, PointError> {
        Self::decompress(bytes, false)
    }

    fn decompress(xb: &[u8; FIELD_BYTES], odd: bool) -> Result<Self, PointError> {
        let x = Option::<FieldElement>::from(FieldElement::from_be_bytes(xb)).ok_or(PointError::NotOnCurve)?;
        let rhs = x.square() * x - (x.double() + x) + CURVE_B;
        let mut y = sqrt_vartime(&rhs).ok_or(PointError::NotOnCurve)?;
        if bool::from(y.is_odd()) != odd {
            y = -y;
        }
        Ok(Self::from_affine(x, y))
    }
}

fn on_curve(x: &FieldElement, y: &FieldElement) -> bool {
    y.square() == x.square() * *x - (x.double() + *x) + CURVE_B
}

/// `table[pos][j] = j · 16^pos · P` for the 56 nibble positions.
fn generator_table() -> &'static [[AffineEntry; 16]; 56] {
    static TABLE: OnceLock<Box<[[AffineEntry; 16]; 56]>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = Box::new([[AffineEntry::default(); 16]; 56]);
        let mut base = GroupPoint::generator();
        for row in table.iter_mut() {
            let mut multiple = base;
            for (j, entry) in row.iter_mut().enumerate().skip(1) {
                let (x, y) = multiple.to_affine().expect("multiples of P below q are not the identity");
                *entry = AffineEntry { x, y, infinity: Choice::from(0) };
                multiple = if j == 1 { base.double() } else { multiple.add_distinct(&base) };
            }
            // multiple = 16 · base
            base = multiple;
        }
        table
    })
}

/// `m · P + gamma · a`, the two-term multi-scalar multiplication.
pub fn msm2(m: &Scalar, gamma: &Scalar, a: &GroupPoint) -> GroupPoint {
    GroupPoint::mul_generator(m) + a.mul(gamma)
}

/// `s · point`.
pub fn scalar_mul(point: &GroupPoint, s: &Scalar) -> GroupPoint {
    point.mul(s)
}

impl ConditionallySelectable for GroupPoint {
    fn conditional_select(a: &Self, b: &Self, choice: Choice) -> Self {
        Self {
            x: FieldElement::conditional_select(&a.x, &b.x, choice),
            y: FieldElement::conditional_select(&a.y, &b.y, choice),
            z: FieldElement::conditional_select(&a.z, &b.z, choice),
        }
    }
}

impl ConstantTimeEq for GroupPoint {
    fn ct_eq(&self, other: &Self) -> Choice {
        let z1z1 = self.z.square();
        let z2z2 = other.z.square();
        let xs = (self.x * z2z2).ct_eq(&(other.x * z1z1));
        let ys = (self.y * z2z2 * other.z).ct_eq(&(other.y * z1z1 * self.z));
        let both_id = self.is_identity() & other.is_identity();
        let neither_id = !self.is_identity() & !other.is_identity();
        both_id | (neither_id & xs & ys)
    }
}

impl PartialEq for GroupPoint {
    fn eq(&self, other: &Self) -> bool {
        self.ct_eq(other).into()
    }
}

impl Eq for GroupPoint {}

impl Add for GroupPoint {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.add_jacobian(&rhs)
    }
}

impl Neg for GroupPoint {
    type Output = Self;
    fn neg(self) -> Self {
        Self { x: self.x, y: -self.y, z: self.z }
    }
}

impl Sub for GroupPoint {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl fmt::Debug for GroupPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_affine() {
            None => write!(f, "GroupPoint(O)"),
            Some(_) => write!(f, "GroupPoint({})", hex::encode(self.to_compressed())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn order_minus_one() -> Scalar {
        -Scalar::ONE
    }

    #[test]
    fn generator_is_on_curve() {
        assert!(GroupPoint::generator().is_on_curve());
    }

    #[test]
    fn group_order_annihilates_generator() {
        // (q-1)·P + P = q·P = O
        let p = GroupPoint::generator();
        let qm1 = p.mul(&order_minus_one());
        assert_eq!(qm1, -p);
        assert!(bool::from((qm1 + p).is_identity()));
    }

    #[test]
    fn zero_and_one() {
        let p = GroupPoint::generator();
        assert_eq!(p.mul(&Scalar::ZERO), GroupPoint::IDENTITY);
        assert_eq!(p.mul(&Scalar::ONE), p);
        assert_eq!(GroupPoint::mul_generator(&Scalar::ZERO), GroupPoint::IDENTITY);
        assert_eq!(GroupPoint::mul_generator(&Scalar::ONE), p);
    }

    #[test]
    fn exceptional_additions() {
        let p = GroupPoint::generator();
        assert_eq!(p + p, p.double());
        assert_eq!(p + GroupPoint::IDENTITY, p);
        assert_eq!(GroupPoint::IDENTITY + p, p);
        assert!(bool::from((p - p).is_identity()));
        assert!(bool::from(GroupPoint::IDENTITY.double().is_identity()));
    }

    #[test]
    fn fixed_base_matches_variable_base() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        for _ in 0..50 {
            let s = Scalar::random(&mut rng);
            assert_eq!(GroupPoint::mul_generator(&s), GroupPoint::generator().mul(&s));
        }
    }

    #[test]
    fn compressed_roundtrip() {
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        for _ in 0..50 {
            let pt = GroupPoint::mul_generator(&Scalar::random(&mut rng));
            assert_eq!(GroupPoint::from_compressed(&pt.to_compressed()).unwrap(), pt);
        }
        let id = GroupPoint::IDENTITY.to_compressed();
        assert_eq!(GroupPoint::from_compressed(&id).unwrap(), GroupPoint::IDENTITY);
    }

    #[test]
    fn x_only_roundtrip_for_even_y() {
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let mut seen = 0;
        while seen < 30 {
            let pt = GroupPoint::mul_generator(&Scalar::random(&mut rng));
            let pt = if pt.has_even_y() { pt } else { -pt };
            assert_eq!(GroupPoint::from_x_bytes(&pt.to_x_bytes()).unwrap(), pt);
            seen += 1;
        }
    }

    #[test]
    fn x_without_curve_solution_is_rejected() {
        let mut found = 0;
        for v in 1u64..200 {
            let mut xb = [0u8; FIELD_BYTES];
            xb[20..].copy_from_slice(&v.to_be_bytes());
            match GroupPoint::from_x_bytes(&xb) {
                Ok(pt) => assert!(pt.is_on_curve()),
                Err(PointError::NotOnCurve) => found += 1,
            }
        }
        assert!(found > 0);
        // x >= p is non-canonical
        assert_eq!(GroupPoint::from_x_bytes(&[0xff; FIELD_BYTES]), Err(PointError::NotOnCurve));
    }

    #[test]
    #[should_panic(expected = "odd-y")]
    #[cfg(debug_assertions)]
    fn odd_y_encoding_is_flagged() {
        let mut rng = ChaCha20Rng::seed_from_u64(10);
        loop {
            let pt = GroupPoint::mul_generator(&Scalar::random(&mut rng));
            if !pt.has_even_y() {
                pt.to_x_bytes();
            }
        }
    }

    #[test]
    fn sqrt_of_squares() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        for _ in 0..50 {
            let a = FieldElement::random(&mut rng);
            let r = sqrt_vartime(&a.square()).unwrap();
            assert!(r == a || r == -a);
        }
        assert!(sqrt_vartime(&FieldElement::from_u64(11)).is_none());
    }
}
