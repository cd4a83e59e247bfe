//! The law-enforcement authority: root of trust, registrar and tracer.

use std::collections::HashMap;

use rand::{CryptoRng, RngCore};

use crate::crypto::group::{GroupPoint, COMPRESSED_POINT_BYTES};
use crate::crypto::hash::{HashTag, SymKey};
use crate::crypto::pke::{adec, keygen_enc, keygen_sig, DecryptionKey, Signature, SigningKey};
use crate::ledger::{Ledger, LedgerPayload, LedgerView, Registrar, TxId};
use crate::wire::{AuthRequest, REQ_BYTES};

use super::error::{RegistrationError, TraceError};
use super::open::open_request;
use super::params::{registration_message, Directory, GroupKeys, GroupSecret, ProtocolConfig, SystemParams, CURVE_NAME, LAMBDA_BITS};

/// What the LEA hands back to the RSM for one registration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LeaReceipt {
    pub txid: TxId,
    pub sigma: Signature,
    pub t_exp: u64,
}

/// An RSU's signed report of a misbehaving request.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Evidence {
    pub rsu_id: String,
    pub req: [u8; REQ_BYTES],
    pub sigma_rt: Signature,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceResult {
    pub id: Vec<u8>,
    pub d_star: SymKey,
    pub ch: GroupPoint,
    pub txid: TxId,
    pub evidence: Evidence,
}

/// `len(ID) ‖ ID ‖ CH` inside `C1`.
pub fn encode_registration_plaintext(id: &[u8], ch: &GroupPoint) -> Vec<u8> {
    let mut out = Vec::with_capacity(4 + id.len() + COMPRESSED_POINT_BYTES);
    out.extend_from_slice(&(id.len() as u32).to_be_bytes());
    out.extend_from_slice(id);
    out.extend_from_slice(&ch.to_compressed());
    out
}

fn decode_registration_plaintext(bytes: &[u8]) -> Option<(Vec<u8>, GroupPoint)> {
    let len = u32::from_be_bytes(bytes.get(..4)?.try_into().ok()?) as usize;
    let id = bytes.get(4..4usize.checked_add(len)?)?;
    let ch: [u8; COMPRESSED_POINT_BYTES] = bytes.get(4 + len..)?.try_into().ok()?;
    let ch = GroupPoint::from_compressed(&ch).ok()?;
    if bool::from(ch.is_identity()) {
        return None;
    }
    Some((id.to_vec(), ch))
}

pub struct Lea {
    params: SystemParams,
    config: ProtocolConfig,
    sig_sk: SigningKey,
    enc_sk: DecryptionKey,
    group: GroupKeys,
    /// Retired epochs, newest last. Kept only here, for tracing old evidence.
    archive: Vec<GroupKeys>,
    ledger: Ledger,
    registrar: Registrar,
    view: LedgerView,
    ids: HashMap<TxId, Vec<u8>>,
}

impl std::fmt::Debug for Lea {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Lea(epoch={}, registrations={})", self.group.epoch(), self.ids.len())
    }
}

/// Generates the LEA key pairs and group secret epoch 0.
pub fn lea_init(ledger: Ledger, registrar: Registrar, config: ProtocolConfig, rng: &mut (impl RngCore + CryptoRng)) -> Lea {
    let (sig_sk, sig_pk) = keygen_sig(rng);
    let (enc_sk, enc_pk) = keygen_enc(rng);
    let group = GroupSecret::random(0, rng).keys();
    let params = SystemParams {
        curve: CURVE_NAME,
        lambda_bits: LAMBDA_BITS,
        generator: GroupPoint::generator(),
        hash_tags: HashTag::ALL,
        lea_sig_pk: sig_pk,
        lea_enc_pk: enc_pk,
    };
    Lea {
        params,
        config,
        sig_sk,
        enc_sk,
        group,
        archive: Vec::new(),
        ledger,
        registrar,
        view: LedgerView::new("lea", 0),
        ids: HashMap::new(),
    }
}

impl Lea {
    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn config(&self) -> &ProtocolConfig {
        &self.config
    }

    pub fn ledger(&self) -> &Ledger {
        &self.ledger
    }

    /// Handed to RSMs over the secure channel.
    pub fn group_secret(&self) -> &GroupSecret {
        self.group.secret()
    }

    pub fn epoch(&self) -> u64 {
        self.group.epoch()
    }

    /// Opens `C1`, signs `ID ‖ CH ‖ T_Exp`, posts the record and remembers `TXID → ID`.
    pub fn register(&mut self, c1: &[u8], now_ms: u64) -> Result<LeaReceipt, RegistrationError> {
        let plain = adec(&self.enc_sk, c1)?;
        let (id, ch) = decode_registration_plaintext(&plain).ok_or(RegistrationError::MalformedRequest)?;
        let t_exp = now_ms + self.config.registration_ttl_ms;
        let sigma = self.sig_sk.sign(&registration_message(&id, &ch, t_exp));
        let txid = self
            .ledger
            .append_registration(&self.registrar, LedgerPayload::Registration { sigma, ch, t_exp }, now_ms)?;
        self.ids.insert(txid, id);
        Ok(LeaReceipt { txid, sigma, t_exp })
    }

    /// Starts epoch `n + 1` and returns its secret for distribution.
    pub fn rotate(&mut self, rng: &mut (impl RngCore + CryptoRng)) -> GroupSecret {
        let next = GroupSecret::random(self.group.epoch() + 1, rng).keys();
        let old = std::mem::replace(&mut self.group, next);
        self.archive.push(old);
        self.group.secret().clone()
    }

    /// Recovers the registered identity behind an RSU-signed request.
    pub fn trace(&mut self, evidence: &Evidence, directory: &Directory, now_ms: u64) -> Result<TraceResult, TraceError> {
        let rsu_pk = directory.rsu_key(&evidence.rsu_id).ok_or(TraceError::BadEvidence)?;
        if !rsu_pk.verify(&evidence.sigma_rt, &evidence.req) {
            return Err(TraceError::BadEvidence);
        }
        let req = AuthRequest::decode(&evidence.req).map_err(|_| TraceError::UnknownCH)?;
        let rsu_pk_bytes = rsu_pk.to_bytes();
        self.view.sync_all(&self.ledger);
        for keys in std::iter::once(&self.group).chain(self.archive.iter().rev()) {
            let Some(opened) = open_request(keys, &req, &rsu_pk_bytes) else { continue };
            let Some(tx) = self.view.find_by_ch(&opened.ch, now_ms) else { continue };
            let Some(id) = self.ids.get(&tx.txid) else { continue };
            return Ok(TraceResult {
                id: id.clone(),
                d_star: opened.d,
                ch: opened.ch,
                txid: tx.txid,
                evidence: evidence.clone(),
            });
        }
        Err(TraceError::UnknownCH)
    }

    /// The registered identity for `txid`, as stored at registration.
    pub fn identity_for(&self, txid: &TxId) -> Option<&[u8]> {
        self.ids.get(txid).map(Vec::as_slice)
    }

    /// All stored `(TXID, ID)` pairs.
    pub fn registrations(&self) -> impl Iterator<Item = (&TxId, &[u8])> {
        self.ids.iter().map(|(t, id)| (t, id.as_slice()))
    }
}
