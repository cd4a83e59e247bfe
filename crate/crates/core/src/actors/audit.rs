//! Public check of an LEA trace claim. Needs no secrets.

use crate::crypto::hash::SymKey;
use crate::crypto::pke::VerifyingKey;
use crate::ledger::{Ledger, LedgerPayload, TxId};
use crate::wire::AuthRequest;

use super::error::AuditError;
use super::lea::{Evidence, TraceResult};
use super::open::open_with_key;
use super::params::{registration_message, Directory};

/// What the LEA discloses when attributing `evidence` to a vehicle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameClaim {
    pub id: Vec<u8>,
    pub d_star: SymKey,
    pub txid: TxId,
}

impl From<&TraceResult> for FrameClaim {
    fn from(t: &TraceResult) -> Self {
        Self { id: t.id.clone(), d_star: t.d_star.clone(), txid: t.txid }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AuditVerdict {
    Framed,
    Consistent,
}

/// `Framed` iff both signatures verify and the commitment recomputed from the
/// request differs from the one registered under the claimed identity.
pub fn audit_frame_claim(
    lea_pk: &VerifyingKey,
    directory: &Directory,
    evidence: &Evidence,
    claim: &FrameClaim,
    ledger: &Ledger,
) -> Result<AuditVerdict, AuditError> {
    let rsu_pk = directory.rsu_key(&evidence.rsu_id).ok_or(AuditError::InvalidEvidence)?;
    if !rsu_pk.verify(&evidence.sigma_rt, &evidence.req) {
        return Err(AuditError::InvalidEvidence);
    }
    let req = AuthRequest::decode(&evidence.req).map_err(|_| AuditError::InvalidEvidence)?;
    let tx = ledger.get(&claim.txid).ok_or(AuditError::InvalidEvidence)?;
    let LedgerPayload::Registration { sigma, ch: ch_h, t_exp } = tx.payload else {
        return Err(AuditError::InvalidEvidence);
    };
    if !lea_pk.verify(&sigma, &registration_message(&claim.id, &ch_h, t_exp)) {
        return Err(AuditError::InvalidEvidence);
    }
    let ch_m = open_with_key(&req, &claim.d_star, &rsu_pk.to_bytes()).map(|(_, _, ch)| ch);
    Ok(if ch_m == Some(ch_h) { AuditVerdict::Consistent } else { AuditVerdict::Framed })
}
