//! Reference arithmetic for the NIST P-224 curve written directly from the
//! published domain parameters with arbitrary-precision integers.
//!
//! Everything here is deliberately naive: affine coordinates, modular inverses
//! per operation and plain double-and-add. It shares no code with the
//! optimized implementation and exists only to check it.

use num_bigint::BigUint;

const P_HEX: &str = "ffffffffffffffffffffffffffffffff000000000000000000000001";
const B_HEX: &str = "b4050a850c04b3abf54132565044b0b7d7bfd8ba270b39432355ffb4";
const GX_HEX: &str = "b70e0cbd6bb4bf7f321390b94a03c1d356c21122343280d6115c1d21";
const GY_HEX: &str = "bd376388b5f723fb4c22dfe6cd4375a05a07476444d5819985007e34";
const N_HEX: &str = "ffffffffffffffffffffffffffff16a2e0b8f03e13dd29455c5c2a3d";

fn hex_int(s: &str) -> BigUint {
    BigUint::parse_bytes(s.as_bytes(), 16).expect("constant is valid hex")
}

/// Field prime `p`.
pub fn p() -> BigUint {
    hex_int(P_HEX)
}

/// Group order `q`.
pub fn q() -> BigUint {
    hex_int(N_HEX)
}

/// An affine point, `None` for the identity.
pub type Affine = Option<(BigUint, BigUint)>;

pub fn generator() -> Affine {
    Some((hex_int(GX_HEX), hex_int(GY_HEX)))
}

pub fn is_on_curve(pt: &Affine) -> bool {
    let Some((x, y)) = pt else { return true };
    let p = p();
    let lhs = (y * y) % &p;
    let three_x = (BigUint::from(3u32) * x) % &p;
    let rhs = ((x * x % &p) * x + hex_int(B_HEX) + &p - three_x) % &p;
    lhs == rhs
}

fn sub_mod(a: &BigUint, b: &BigUint, m: &BigUint) -> BigUint {
    ((a % m) + m - (b % m)) % m
}

fn inv_mod(a: &BigUint, m: &BigUint) -> BigUint {
    a.modinv(m).expect("nonzero element is invertible")
}

pub fn neg(pt: &Affine) -> Affine {
    pt.as_ref().map(|(x, y)| (x.clone(), sub_mod(&BigUint::ZERO, y, &p())))
}

/// Textbook chord-and-tangent addition with `a = −3`.
pub fn add(a: &Affine, b: &Affine) -> Affine {
    let p = p();
    let (Some((x1, y1)), Some((x2, y2))) = (a, b) else {
        return if a.is_none() { b.clone() } else { a.clone() };
    };
    let lambda = if x1 == x2 {
        if (y1 + y2) % &p == BigUint::ZERO {
            return None;
        }
        let num = sub_mod(&(BigUint::from(3u32) * x1 * x1), &BigUint::from(3u32), &p);
        num * inv_mod(&((BigUint::from(2u32) * y1) % &p), &p) % &p
    } else {
        sub_mod(y2, y1, &p) * inv_mod(&sub_mod(x2, x1, &p), &p) % &p
    };
    let x3 = sub_mod(&sub_mod(&(&lambda * &lambda), x1, &p), x2, &p);
    let y3 = sub_mod(&(&lambda * sub_mod(x1, &x3, &p)), y1, &p);
    Some((x3, y3))
}

type Jacobian = (BigUint, BigUint, BigUint);

/// Generic Jacobian doubling (`a = −3` is not exploited).
fn jac_double(pt: &Jacobian, p: &BigUint) -> Jacobian {
    let (x, y, z) = pt;
    if *z == BigUint::ZERO || *y == BigUint::ZERO {
        return (BigUint::from(1u32), BigUint::from(1u32), BigUint::ZERO);
    }
    let a = p - 3u32;
    let yy = y * y % p;
    let s = BigUint::from(4u32) * x * &yy % p;
    let zz = z * z % p;
    let m = (BigUint::from(3u32) * x * x + a * (&zz * &zz % p)) % p;
    let x3 = sub_mod(&(&m * &m), &(BigUint::from(2u32) * &s), p);
    let y3 = sub_mod(&(&m * sub_mod(&s, &x3, p)), &(BigUint::from(8u32) * &yy * &yy), p);
    let z3 = BigUint::from(2u32) * y * z % p;
    (x3, y3, z3)
}

/// Jacobian plus affine, falling back to doubling when the inputs coincide.
fn jac_add_affine(pt: &Jacobian, q: &(BigUint, BigUint), p: &BigUint) -> Jacobian {
    let (x1, y1, z1) = pt;
    if *z1 == BigUint::ZERO {
        return (q.0.clone(), q.1.clone(), BigUint::from(1u32));
    }
    let z1z1 = z1 * z1 % p;
    let u2 = &q.0 * &z1z1 % p;
    let s2 = &q.1 * z1 % p * &z1z1 % p;
    let h = sub_mod(&u2, x1, p);
    let r = sub_mod(&s2, y1, p);
    if h == BigUint::ZERO {
        return if r == BigUint::ZERO {
            jac_double(pt, p)
        } else {
            (BigUint::from(1u32), BigUint::from(1u32), BigUint::ZERO)
        };
    }
    let hh = &h * &h % p;
    let hhh = &hh * &h % p;
    let v = x1 * &hh % p;
    let x3 = sub_mod(&sub_mod(&(&r * &r), &hhh, p), &(BigUint::from(2u32) * &v), p);
    let y3 = sub_mod(&(&r * sub_mod(&v, &x3, p)), &(y1 * &hhh), p);
    let z3 = z1 * &h % p;
    (x3, y3, z3)
}

fn jac_to_affine(pt: &Jacobian, p: &BigUint) -> Affine {
    let (x, y, z) = pt;
    if *z == BigUint::ZERO {
        return None;
    }
    let zi = inv_mod(z, p);
    let zi2 = &zi * &zi % p;
    Some((x * &zi2 % p, y * &zi2 % p * &zi % p))
}

/// Left-to-right double-and-add in Jacobian coordinates.
pub fn mul(pt: &Affine, k: &BigUint) -> Affine {
    let Some(base) = pt else { return None };
    let p = p();
    let mut acc: Jacobian = (BigUint::from(1u32), BigUint::from(1u32), BigUint::ZERO);
    for i in (0..k.bits()).rev() {
        acc = jac_double(&acc, &p);
        if k.bit(i) {
            acc = jac_add_affine(&acc, base, &p);
        }
    }
    jac_to_affine(&acc, &p)
}

/// Left-to-right double-and-add using only affine [`add`]; slowest, simplest.
pub fn mul_affine(pt: &Affine, k: &BigUint) -> Affine {
    let mut acc: Affine = None;
    for i in (0..k.bits()).rev() {
        acc = add(&acc, &acc);
        if k.bit(i) {
            acc = add(&acc, pt);
        }
    }
    acc
}

/// `x` and `y` as 28-byte big-endian arrays.
pub fn to_bytes(pt: &Affine) -> Option<([u8; 28], [u8; 28])> {
    let (x, y) = pt.as_ref()?;
    Some((fixed28(x), fixed28(y)))
}

pub fn fixed28(v: &BigUint) -> [u8; 28] {
    let bytes = v.to_bytes_be();
    assert!(bytes.len() <= 28, "value wider than 224 bits");
    let mut out = [0u8; 28];
    out[28 - bytes.len()..].copy_from_slice(&bytes);
    out
}

pub fn from_be(bytes: &[u8]) -> BigUint {
    BigUint::from_bytes_be(bytes)
}
