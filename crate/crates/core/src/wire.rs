//! Fixed-layout encodings of every protocol message.
//!
//! Integers are big-endian and fields appear in tuple order. Points travel as
//! their 28-byte x-coordinate; senders only ever emit the even-y representative.

use core::fmt;

use thiserror::Error;

use crate::crypto::group::{GroupPoint, Scalar, POINT_BYTES, SCALAR_BYTES};
use crate::crypto::hash::{Digest, SymKey, HASH_LEN};
use crate::crypto::pke::{Signature, SIGNATURE_BYTES};
use crate::crypto::symmetric::PID_LEN;

pub const TIMESTAMP_BYTES: usize = 4;
pub const REQ_BYTES: usize = PID_LEN + SCALAR_BYTES + POINT_BYTES + SCALAR_BYTES + TIMESTAMP_BYTES;
/// `β_RSU ‖ pID+ ‖ D+`.
pub const S2_BYTES: usize = SCALAR_BYTES + PID_LEN + HASH_LEN;
pub const REP_BYTES: usize = S2_BYTES + HASH_LEN + TIMESTAMP_BYTES;
pub const ACK_BYTES: usize = HASH_LEN;
/// `pID' ‖ D'`.
pub const UPDATE_BYTES: usize = PID_LEN + HASH_LEN;
pub const TXID_BYTES: usize = 32;
pub const REG_REPLY_BYTES: usize = 1 + TXID_BYTES + SIGNATURE_BYTES + 8 + PID_LEN + HASH_LEN;

const _: () = assert!(REQ_BYTES == 104);
const _: () = assert!(REP_BYTES == 88);
const _: () = assert!(ACK_BYTES == 20);
const _: () = assert!(REQ_BYTES + REP_BYTES + ACK_BYTES == 212);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WireError {
    #[error("wrong length: expected {expected} bytes, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("point is not on the curve")]
    OffCurvePoint,
    #[error("scalar is not reduced modulo the group order")]
    NonCanonicalScalar,
    #[error("unknown envelope kind {0:#04x}")]
    UnknownKind(u8),
    #[error("malformed transcript line: {0}")]
    BadTranscriptLine(String),
}

fn expect_len(bytes: &[u8], expected: usize) -> Result<(), WireError> {
    if bytes.len() == expected {
        Ok(())
    } else {
        Err(WireError::WrongLength { expected, got: bytes.len() })
    }
}

fn decode_scalar(bytes: &[u8]) -> Result<Scalar, WireError> {
    let arr: &[u8; SCALAR_BYTES] = bytes.try_into().expect("caller slices exact width");
    Option::from(Scalar::from_be_bytes(arr)).ok_or(WireError::NonCanonicalScalar)
}

/// Harness milliseconds modulo 2^32.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Timestamp(pub u32);

impl Timestamp {
    pub fn from_ms(ms: u64) -> Self {
        Self(ms as u32)
    }

    /// Signed distance `self − other` on the 2^32 circle.
    pub fn wrapping_diff(self, other: Timestamp) -> i64 {
        self.0.wrapping_sub(other.0) as i32 as i64
    }

    /// `|now − self| ≤ window_ms` across wraparound.
    pub fn is_fresh(self, now: Timestamp, window_ms: u32) -> bool {
        now.wrapping_diff(self).unsigned_abs() <= window_ms as u64
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pid(pub [u8; PID_LEN]);

impl fmt::Debug for Pid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pid({})", hex::encode(self.0))
    }
}

/// x-only encoding; `a` must be a non-identity point with even y.
pub fn canonicalize_point(a: &GroupPoint) -> [u8; POINT_BYTES] {
    a.to_x_bytes()
}

pub fn decanonicalize_point(bytes: &[u8; POINT_BYTES]) -> Result<GroupPoint, WireError> {
    GroupPoint::from_x_bytes(bytes).map_err(|_| WireError::OffCurvePoint)
}

/// `REQ = (pID, m, A, S1, T1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AuthRequest {
    pub pid: Pid,
    pub m: Scalar,
    pub a: GroupPoint,
    pub s1: [u8; SCALAR_BYTES],
    pub t1: Timestamp,
}

impl AuthRequest {
    pub fn encode(&self) -> [u8; REQ_BYTES] {
        let mut out = [0u8; REQ_BYTES];
        out[..16].copy_from_slice(&self.pid.0);
        out[16..44].copy_from_slice(&self.m.to_be_bytes());
        out[44..72].copy_from_slice(&canonicalize_point(&self.a));
        out[72..100].copy_from_slice(&self.s1);
        out[100..].copy_from_slice(&self.t1.0.to_be_bytes());
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, WireError> {
        expect_len(bytes, REQ_BYTES)?;
        let m = decode_scalar(&bytes[16..44])?;
        let a = decanonicalize_point(bytes[44..72].try_into().expect("width"))?;
        Ok(Self {
            pid: Pid(bytes[..16].try_into().expect("width")),
            m,
            a,
            s1: bytes[72..100].try_into().expect("width"),
            t1: Timestamp(u32::from_be_bytes(bytes[100..].try_into().expect("width"))),
        })
    }
}

/// `REP = (S2, S3, T2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AuthReply {
    pub s2: [u8; S2_BYTES],
    pub s3: Digest,
    pub t2: Timestamp,
}

impl AuthReply {
    pub fn encode(&self) -> [u8; REP_BYTES] {
        let mut out = [0u8; REP_BYTES];
        out[..64].copy_from_slice(&self.s2);
        out[64..84].copy_from_slice(&self.s3.0);
        out[84..].copy_from_slice(&self.t2.0.to_be_bytes());
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, WireError> {
        expect_len(bytes, REP_BYTES)?;
        Ok(Self {
            s2: bytes[..64].try_into().expect("width"),
            s3: Digest(bytes[64..84].try_into().expect("width")),
            t2: Timestamp(u32::from_be_bytes(bytes[84..].try_into().expect("width"))),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AuthAck {
    pub ack: Digest,
}

impl AuthAck {
    pub fn encode(&self) -> [u8; ACK_BYTES] {
        self.ack.0
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, WireError> {
        expect_len(bytes, ACK_BYTES)?;
        Ok(Self { ack: Digest(bytes.try_into().expect("width")) })
    }
}

/// `S_upd = SEN_Ks(pID' ‖ D')`, pushed to established sessions on key rotation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UpdateMsg {
    pub s_upd: [u8; UPDATE_BYTES],
}

impl UpdateMsg {
    pub fn encode(&self) -> [u8; UPDATE_BYTES] {
        self.s_upd
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, WireError> {
        expect_len(bytes, UPDATE_BYTES)?;
        Ok(Self { s_upd: bytes.try_into().expect("width") })
    }
}

/// `(TXID, σ, T_Exp, pID, D)` returned to a registering vehicle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegistrationReply {
    pub txid: [u8; TXID_BYTES],
    pub sigma: Signature,
    pub t_exp: u64,
    pub pid: Pid,
    pub d: SymKey,
}

/// Registration traffic between a VN and its RSM.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RegistrationEnvelope {
    /// `C1 = AEN_pkLEA(ID, CH)`.
    Request { c1: Vec<u8> },
    Reply(RegistrationReply),
}

const KIND_REG_REQUEST: u8 = 0x01;
const KIND_REG_REPLY: u8 = 0x02;

impl RegistrationEnvelope {
    pub fn encode(&self) -> Vec<u8> {
        match self {
            Self::Request { c1 } => {
                let mut out = Vec::with_capacity(5 + c1.len());
                out.push(KIND_REG_REQUEST);
                out.extend_from_slice(&(c1.len() as u32).to_be_bytes());
                out.extend_from_slice(c1);
                out
            }
            Self::Reply(r) => {
                let mut out = Vec::with_capacity(REG_REPLY_BYTES);
                out.push(KIND_REG_REPLY);
                out.extend_from_slice(&r.txid);
                out.extend_from_slice(&r.sigma.0);
                out.extend_from_slice(&r.t_exp.to_be_bytes());
                out.extend_from_slice(&r.pid.0);
                out.extend_from_slice(r.d.as_bytes());
                out
            }
        }
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, WireError> {
        let Some((&kind, rest)) = bytes.split_first() else {
            return Err(WireError::WrongLength { expected: 1, got: 0 });
        };
        match kind {
            KIND_REG_REQUEST => {
                if rest.len() < 4 {
                    return Err(WireError::WrongLength { expected: 5, got: bytes.len() });
                }
                let len = u32::from_be_bytes(rest[..4].try_into().expect("width")) as usize;
                expect_len(&rest[4..], len).map_err(|_| WireError::WrongLength {
                    expected: 5usize.saturating_add(len),
                    got: bytes.len(),
                })?;
                Ok(Self::Request { c1: rest[4..].to_vec() })
            }
            KIND_REG_REPLY => {
                expect_len(bytes, REG_REPLY_BYTES)?;
                let (txid, rest) = rest.split_at(TXID_BYTES);
                let (sigma, rest) = rest.split_at(SIGNATURE_BYTES);
                let (t_exp, rest) = rest.split_at(8);
                let (pid, d) = rest.split_at(PID_LEN);
                Ok(Self::Reply(RegistrationReply {
                    txid: txid.try_into().expect("width"),
                    sigma: Signature(sigma.try_into().expect("width")),
                    t_exp: u64::from_be_bytes(t_exp.try_into().expect("width")),
                    pid: Pid(pid.try_into().expect("width")),
                    d: SymKey::from_bytes(d.try_into().expect("width")),
                }))
            }
            other => Err(WireError::UnknownKind(other)),
        }
    }
}

/// One message in a hex transcript: `direction name hex`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TranscriptLine {
    pub direction: String,
    pub name: String,
    pub bytes: Vec<u8>,
}

impl TranscriptLine {
    pub fn new(direction: impl Into<String>, name: impl Into<String>, bytes: &[u8]) -> Self {
        Self { direction: direction.into(), name: name.into(), bytes: bytes.to_vec() }
    }

    pub fn parse(line: &str) -> Result<Self, WireError> {
        let bad = || WireError::BadTranscriptLine(line.to_string());
        let mut parts = line.split_whitespace();
        let (Some(direction), Some(name), hex_part, None) = (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            return Err(bad());
        };
        let bytes = hex::decode(hex_part.unwrap_or("")).map_err(|_| bad())?;
        Ok(Self { direction: direction.to_string(), name: name.to_string(), bytes })
    }
}

impl fmt::Display for TranscriptLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.direction, self.name, hex::encode(&self.bytes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn freshness_handles_wraparound() {
        let near_max = Timestamp(u32::MAX - 100);
        let wrapped = Timestamp(200);
        assert!(near_max.is_fresh(wrapped, 500));
        assert!(wrapped.is_fresh(near_max, 500));
        assert!(!Timestamp(0).is_fresh(Timestamp(501), 500));
        assert!(Timestamp(0).is_fresh(Timestamp(500), 500));
        assert_eq!(Timestamp::from_ms((1u64 << 32) + 7), Timestamp(7));
    }

    #[test]
    fn short_buffers_are_wrong_length() {
        assert_eq!(
            AuthRequest::decode(&[0u8; 103]),
            Err(WireError::WrongLength { expected: 104, got: 103 })
        );
        assert!(matches!(AuthReply::decode(&[0u8; 89]), Err(WireError::WrongLength { .. })));
        assert!(matches!(AuthAck::decode(&[]), Err(WireError::WrongLength { .. })));
    }

    #[test]
    fn request_rejects_unreduced_scalar() {
        let mut buf = [0u8; REQ_BYTES];
        buf[16..44].fill(0xff);
        assert_eq!(AuthRequest::decode(&buf), Err(WireError::NonCanonicalScalar));
    }

    #[test]
    fn transcript_line_roundtrip() {
        let l = TranscriptLine::new("VN->RSU", "REQ", &[0xde, 0xad]);
        assert_eq!(l.to_string(), "VN->RSU REQ dead");
        assert_eq!(TranscriptLine::parse(&l.to_string()).unwrap(), l);
        assert_eq!(TranscriptLine::parse("a b").unwrap().bytes, Vec::<u8>::new());
        assert!(TranscriptLine::parse("a b zz").is_err());
        assert!(TranscriptLine::parse("a").is_err());
    }
}
