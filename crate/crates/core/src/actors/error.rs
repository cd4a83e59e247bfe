use thiserror::Error;

use crate::crypto::pke::PkeError;
use crate::ledger::LedgerError;
use crate::wire::WireError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RsuError {
    #[error("timestamp outside the freshness window")]
    StaleTimestamp,
    #[error("request already seen")]
    ReplayDetected,
    #[error("recomputed commitment is not registered")]
    UnknownCredential,
    #[error("credential has been revoked")]
    RevokedCredential,
    #[error("registration has expired")]
    ExpiredRegistration,
    #[error("acknowledgement does not match the session")]
    BadAck,
    #[error("malformed message: {0}")]
    Malformed(#[from] WireError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VnError {
    #[error("vehicle has no credential")]
    NotRegistered,
    #[error("registration signature does not verify")]
    BadSignature,
    #[error("registration record is not on the ledger")]
    NotOnChain,
    #[error("registration has expired")]
    ExpiredWindow,
    #[error("timestamp outside the freshness window")]
    StaleTimestamp,
    #[error("reply key confirmation failed")]
    BadKeyConfirm,
    #[error("no established session to receive an update")]
    NoEstablishedSession,
    #[error("malformed message: {0}")]
    Malformed(#[from] WireError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RegistrationError {
    #[error("cannot open registration request: {0}")]
    Decrypt(#[from] PkeError),
    #[error("registration request is malformed")]
    MalformedRequest,
    #[error("ledger rejected registration: {0}")]
    Ledger(#[from] LedgerError),
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum TraceError {
    #[error("evidence signature does not verify under a known RSU key")]
    BadEvidence,
    #[error("recomputed commitment is not on the ledger")]
    UnknownCH,
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum AuditError {
    #[error("a signature in the claim does not verify; the claim is undecidable")]
    InvalidEvidence,
}
