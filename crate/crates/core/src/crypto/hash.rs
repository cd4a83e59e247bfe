//! The domain-separated hash family `H0`..`H6`.
//!
//! Every function is SHAKE256 over `DOMAIN ‖ tag ‖ arity ‖ args`, where each
//! argument is a one-byte kind marker followed by a 4-byte big-endian length
//! and its bytes. Scalar-valued tags rejection-sample 28-byte blocks from the
//! XOF until one lands in `[1, q)`, so their output carries no modular bias.

use core::fmt;

use sha3::digest::{ExtendableOutput, Update, XofReader};
use sha3::Shake256;
use subtle::ConstantTimeEq;
use zeroize::{Zeroize, ZeroizeOnDrop};

use super::group::{GroupPoint, NonZeroScalar, Scalar, SCALAR_BYTES};

/// Output length of the string-valued hashes (λ = 160 bits).
pub const HASH_LEN: usize = 20;

const DOMAIN: &[u8] = b"handover-auth/v1/H";

/// A public λ-bit hash value.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Digest(pub [u8; HASH_LEN]);

impl Digest {
    pub fn as_bytes(&self) -> &[u8; HASH_LEN] {
        &self.0
    }

    pub fn ct_eq(&self, other: &Self) -> bool {
        self.0.ct_eq(&other.0).into()
    }
}

impl fmt::Debug for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Digest({})", hex::encode(self.0))
    }
}

/// A λ-bit secret used as a symmetric key (`D`, `M`, `Ks`).
#[derive(Clone, Zeroize, ZeroizeOnDrop)]
pub struct SymKey([u8; HASH_LEN]);

impl SymKey {
    pub fn from_bytes(bytes: [u8; HASH_LEN]) -> Self {
        Self(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; HASH_LEN] {
        &self.0
    }
}

impl PartialEq for SymKey {
    fn eq(&self, other: &Self) -> bool {
        self.0.ct_eq(&other.0).into()
    }
}

impl Eq for SymKey {}

impl fmt::Debug for SymKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SymKey(..)")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputKind {
    /// Element of `Z_q^*`.
    Scalar,
    /// λ-bit string.
    Bits,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HashTag {
    H0,
    H1,
    H2,
    H3,
    H4,
    H5,
    H6,
}

impl HashTag {
    pub const ALL: [HashTag; 7] = [Self::H0, Self::H1, Self::H2, Self::H3, Self::H4, Self::H5, Self::H6];

    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn arity(self) -> usize {
        match self {
            Self::H0 => 2,
            Self::H1 => 4,
            Self::H2 => 7,
            Self::H3 => 4,
            Self::H4 => 3,
            Self::H5 => 7,
            Self::H6 => 4,
        }
    }

    pub fn output(self) -> OutputKind {
        match self {
            Self::H0 | Self::H2 => OutputKind::Scalar,
            _ => OutputKind::Bits,
        }
    }
}

/// One argument to a tagged hash.
#[derive(Clone, Copy)]
pub enum HashInput<'a> {
    Bytes(&'a [u8]),
    Scalar(&'a Scalar),
    Point(&'a GroupPoint),
    Timestamp(u32),
}

impl HashInput<'_> {
    fn absorb(&self, h: &mut Shake256) {
        fn put(h: &mut Shake256, kind: u8, bytes: &[u8]) {
            h.update(&[kind]);
            h.update(&(bytes.len() as u32).to_be_bytes());
            h.update(bytes);
        }
        match self {
            HashInput::Bytes(b) => put(h, 0, b),
            HashInput::Scalar(s) => put(h, 1, &s.to_be_bytes()),
            HashInput::Point(p) => put(h, 2, &p.to_compressed()),
            HashInput::Timestamp(t) => put(h, 3, &t.to_be_bytes()),
        }
    }
}

fn xof(tag: HashTag, inputs: &[HashInput<'_>]) -> impl XofReader {
    assert_eq!(inputs.len(), tag.arity(), "{tag:?} called with wrong arity");
    let mut h = Shake256::default();
    h.update(DOMAIN);
    h.update(&[tag.id(), inputs.len() as u8]);
    for input in inputs {
        input.absorb(&mut h);
    }
    h.finalize_xof()
}

/// λ-bit output of a string-valued tag.
pub fn hash_bits(tag: HashTag, inputs: &[HashInput<'_>]) -> [u8; HASH_LEN] {
    assert_eq!(tag.output(), OutputKind::Bits, "{tag:?} is scalar-valued");
    let mut out = [0u8; HASH_LEN];
    xof(tag, inputs).read(&mut out);
    out
}

/// `Z_q^*` output of a scalar-valued tag.
pub fn hash_scalar(tag: HashTag, inputs: &[HashInput<'_>]) -> NonZeroScalar {
    assert_eq!(tag.output(), OutputKind::Scalar, "{tag:?} is string-valued");
    let mut reader = xof(tag, inputs);
    loop {
        let mut block = [0u8; SCALAR_BYTES];
        reader.read(&mut block);
        if let Some(s) = Option::<Scalar>::from(Scalar::from_be_bytes(&block)).and_then(NonZeroScalar::new) {
            return s;
        }
    }
}

/// `H0(ID, s)`: the VN's initial chameleon randomness `r*`.
pub fn h0(id: &[u8], s: &Scalar) -> NonZeroScalar {
    hash_scalar(HashTag::H0, &[HashInput::Bytes(id), HashInput::Scalar(s)])
}

/// `H1(PD, GK, b, pID)`: the symmetric key `D` bound to a pseudo-identity.
pub fn h1(pd: &[u8], gk: &Scalar, b: &Scalar, pid: &[u8]) -> SymKey {
    SymKey(hash_bits(
        HashTag::H1,
        &[HashInput::Bytes(pd), HashInput::Scalar(gk), HashInput::Scalar(b), HashInput::Bytes(pid)],
    ))
}

/// `H2(pID, β, A, S1, D, pk_RSU, T1)`: the challenge `γ`.
#[allow(clippy::too_many_arguments)]
pub fn h2(pid: &[u8], beta: &Scalar, a: &GroupPoint, s1: &[u8], d: &SymKey, rsu_pk: &[u8], t1: u32) -> NonZeroScalar {
    hash_scalar(
        HashTag::H2,
        &[
            HashInput::Bytes(pid),
            HashInput::Scalar(beta),
            HashInput::Point(a),
            HashInput::Bytes(s1),
            HashInput::Bytes(d.as_bytes()),
            HashInput::Bytes(rsu_pk),
            HashInput::Timestamp(t1),
        ],
    )
}

/// `H3(CH, D, β, T1)`: the handover secret `M`.
pub fn h3(ch: &GroupPoint, d: &SymKey, beta: &Scalar, t1: u32) -> SymKey {
    SymKey(hash_bits(
        HashTag::H3,
        &[
            HashInput::Point(ch),
            HashInput::Bytes(d.as_bytes()),
            HashInput::Scalar(beta),
            HashInput::Timestamp(t1),
        ],
    ))
}

/// `H4(β_RSU, M, T2)`: the pairwise transient key `Ks`.
pub fn h4(beta_rsu: &Scalar, m: &SymKey, t2: u32) -> SymKey {
    SymKey(hash_bits(
        HashTag::H4,
        &[HashInput::Scalar(beta_rsu), HashInput::Bytes(m.as_bytes()), HashInput::Timestamp(t2)],
    ))
}

/// `H5(S2, β_RSU, pID+, D+, M, Ks, T2)`: the RSU's key confirmation `S3`.
#[allow(clippy::too_many_arguments)]
pub fn h5(s2: &[u8], beta_rsu: &Scalar, pid_next: &[u8], d_next: &SymKey, m: &SymKey, ks: &SymKey, t2: u32) -> Digest {
    Digest(hash_bits(
        HashTag::H5,
        &[
            HashInput::Bytes(s2),
            HashInput::Scalar(beta_rsu),
            HashInput::Bytes(pid_next),
            HashInput::Bytes(d_next.as_bytes()),
            HashInput::Bytes(m.as_bytes()),
            HashInput::Bytes(ks.as_bytes()),
            HashInput::Timestamp(t2),
        ],
    ))
}

/// `H6(M, Ks, REQ, REP)`: the VN's acknowledgement.
pub fn h6(m: &SymKey, ks: &SymKey, req: &[u8], rep: &[u8]) -> Digest {
    Digest(hash_bits(
        HashTag::H6,
        &[
            HashInput::Bytes(m.as_bytes()),
            HashInput::Bytes(ks.as_bytes()),
            HashInput::Bytes(req),
            HashInput::Bytes(rep),
        ],
    ))
}
