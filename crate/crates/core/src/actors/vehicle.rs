//! The vehicle node: registers once, then proves knowledge of its chameleon
//! trapdoor at every handover while rotating its pseudo-identity.

use std::collections::VecDeque;

use rand::{CryptoRng, RngCore};
use zeroize::Zeroize;

use crate::crypto::chameleon::{ch_keygen_with, ChameleonTrapdoor};
use crate::crypto::group::{GroupPoint, NonZeroScalar, Scalar, SCALAR_BYTES};
use crate::crypto::hash::{h0, h3, h4, h5, h6, SymKey, HASH_LEN};
use crate::crypto::pke::{aenc, Signature};
use crate::crypto::symmetric::{sym_decrypt, sym_encrypt, PID_LEN};
use crate::ledger::{Ledger, LedgerPayload, TxId};
use crate::wire::{
    AuthAck, AuthReply, AuthRequest, Pid, RegistrationEnvelope, RegistrationReply, Timestamp, UpdateMsg, REP_BYTES,
    REQ_BYTES, S2_BYTES,
};

use super::error::VnError;
use super::lea::encode_registration_plaintext;
use super::params::{registration_message, ProtocolConfig, SystemParams, CTX_S1, CTX_S2, CTX_UPDATE};
use super::rsu::parse_s2;

/// The vehicle's long-term secret and current pseudonym state.
pub struct ChameleonCredential {
    trapdoor: ChameleonTrapdoor,
    y: GroupPoint,
    ch: GroupPoint,
    sigma: Signature,
    txid: TxId,
    t_exp: u64,
    pid: Pid,
    d: SymKey,
}

impl ChameleonCredential {
    pub fn ch(&self) -> &GroupPoint {
        &self.ch
    }

    pub fn y(&self) -> &GroupPoint {
        &self.y
    }

    pub fn trapdoor(&self) -> &ChameleonTrapdoor {
        &self.trapdoor
    }

    pub fn sigma(&self) -> &Signature {
        &self.sigma
    }

    pub fn txid(&self) -> &TxId {
        &self.txid
    }

    pub fn t_exp(&self) -> u64 {
        self.t_exp
    }

    pub fn pid(&self) -> Pid {
        self.pid
    }

    pub fn d(&self) -> &SymKey {
        &self.d
    }
}

impl std::fmt::Debug for ChameleonCredential {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ChameleonCredential(pid={:?}, t_exp={})", self.pid, self.t_exp)
    }
}

/// State carried between sending `C1` and receiving the RSM's reply.
pub struct PendingRegistration {
    trapdoor: ChameleonTrapdoor,
    y: GroupPoint,
    ch: GroupPoint,
}

/// Vehicle-side handover state.
pub struct VnSession {
    beta: Scalar,
    t1: Timestamp,
    d: SymKey,
    req: [u8; REQ_BYTES],
    rsu_pk: Vec<u8>,
    /// True when `A` had to be computed on the critical path.
    pub inline_point: bool,
}

impl Drop for VnSession {
    fn drop(&mut self) {
        self.beta.zeroize();
    }
}

/// Result of a completed handover on the vehicle side.
pub struct VnOutcome {
    pub ack: AuthAck,
    pub ks: SymKey,
}

pub struct Vehicle {
    id: Vec<u8>,
    params: SystemParams,
    config: ProtocolConfig,
    credential: Option<ChameleonCredential>,
    pool: VecDeque<(Scalar, GroupPoint)>,
    last_ks: Option<SymKey>,
    /// Public key of the RSU behind `last_ks`.
    last_peer: Option<Vec<u8>>,
}

impl std::fmt::Debug for Vehicle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Vehicle(registered={}, pool={})", self.credential.is_some(), self.pool.len())
    }
}

impl Vehicle {
    pub fn new(id: impl Into<Vec<u8>>, params: SystemParams, config: ProtocolConfig) -> Self {
        Self { id: id.into(), params, config, credential: None, pool: VecDeque::new(), last_ks: None, last_peer: None }
    }

    pub fn id(&self) -> &[u8] {
        &self.id
    }

    pub fn credential(&self) -> Option<&ChameleonCredential> {
        self.credential.as_ref()
    }

    pub fn pool_len(&self) -> usize {
        self.pool.len()
    }

    /// Builds the trapdoor with `r* = H0(ID, s)` and `C1 = AEN_pkLEA(ID, CH)`.
    pub fn begin_registration(&self, rng: &mut (impl RngCore + CryptoRng)) -> (RegistrationEnvelope, PendingRegistration) {
        let s = NonZeroScalar::random(rng).get();
        let r_star = h0(&self.id, &s);
        let kp = ch_keygen_with(rng, &r_star.get());
        let c1 = aenc(&self.params.lea_enc_pk, &encode_registration_plaintext(&self.id, &kp.key.ch), rng);
        (
            RegistrationEnvelope::Request { c1 },
            PendingRegistration { trapdoor: kp.trapdoor, y: kp.key.y, ch: kp.key.ch },
        )
    }

    /// Accepts the RSM's reply once `σ` verifies and the record is on the ledger.
    ///
    /// A genuine LEA signature whose ledger record names a different commitment is
    /// reported as [`VnError::NotOnChain`]; any other signature failure as
    /// [`VnError::BadSignature`].
    pub fn finish_registration(
        &mut self,
        pending: PendingRegistration,
        reply: RegistrationReply,
        ledger: &Ledger,
        now_ms: u64,
    ) -> Result<(), VnError> {
        let msg = registration_message(&self.id, &pending.ch, reply.t_exp);
        let sig_ok = self.params.lea_sig_pk.verify(&reply.sigma, &msg);
        let mine = LedgerPayload::Registration { sigma: reply.sigma, ch: pending.ch, t_exp: reply.t_exp };
        if !sig_ok {
            let replayed = ledger.get(&reply.txid).is_some_and(|tx| {
                matches!(tx.payload, LedgerPayload::Registration { sigma, ch, .. } if sigma == reply.sigma && ch != pending.ch)
            });
            return Err(if replayed { VnError::NotOnChain } else { VnError::BadSignature });
        }
        if !ledger.verify_inclusion(&reply.txid, &mine) {
            return Err(VnError::NotOnChain);
        }
        if reply.t_exp <= now_ms {
            return Err(VnError::ExpiredWindow);
        }
        self.credential = Some(ChameleonCredential {
            trapdoor: pending.trapdoor,
            y: pending.y,
            ch: pending.ch,
            sigma: reply.sigma,
            txid: reply.txid,
            t_exp: reply.t_exp,
            pid: reply.pid,
            d: reply.d,
        });
        Ok(())
    }

    /// `A = α·Y`, computed as `(α·x)·P` on the fixed-base table.
    fn fresh_point(td: &ChameleonTrapdoor, rng: &mut (impl RngCore + CryptoRng)) -> (Scalar, GroupPoint) {
        let alpha = NonZeroScalar::random(rng).get();
        let a = GroupPoint::mul_generator(&(alpha * td.x().get())).normalize();
        // A and −A share x; negating α picks the even-y one.
        if a.has_even_y() {
            (alpha, a)
        } else {
            (-alpha, -a)
        }
    }

    /// Precomputes `n` more `(α, A = α·Y)` pairs, each with even-y `A`.
    pub fn refill_pool(&mut self, n: usize, rng: &mut (impl RngCore + CryptoRng)) -> Result<(), VnError> {
        let cred = self.credential.as_ref().ok_or(VnError::NotRegistered)?;
        for _ in 0..n {
            self.pool.push_back(Self::fresh_point(&cred.trapdoor, rng));
        }
        Ok(())
    }

    /// `REQ = (pID, m, A, S1, T1)` with `m = k − α·γ·x`.
    pub fn start_handover(
        &mut self,
        rsu_pk: &[u8],
        now_ms: u64,
        rng: &mut (impl RngCore + CryptoRng),
    ) -> Result<(AuthRequest, VnSession), VnError> {
        let cred = self.credential.as_ref().ok_or(VnError::NotRegistered)?;
        if cred.t_exp <= now_ms {
            return Err(VnError::ExpiredWindow);
        }
        let (alpha, a, inline_point) = match self.pool.pop_front() {
            Some((alpha, a)) => (alpha, a, false),
            None => {
                let (alpha, a) = Self::fresh_point(&cred.trapdoor, rng);
                (alpha, a, true)
            }
        };
        let beta = NonZeroScalar::random(rng).get();
        let t1 = Timestamp::from_ms(now_ms);
        let s1: [u8; SCALAR_BYTES] = sym_encrypt(&cred.d, &beta.to_be_bytes(), CTX_S1).try_into().expect("length preserving");
        let gamma = crate::crypto::hash::h2(&cred.pid.0, &beta, &a, &s1, &cred.d, rsu_pk, t1.0);
        let mut r = alpha * gamma.get();
        let m = *cred.trapdoor.k() - r * cred.trapdoor.x().get();
        r.zeroize();
        let req = AuthRequest { pid: cred.pid, m, a, s1, t1 };
        let session = VnSession { beta, t1, d: cred.d.clone(), req: req.encode(), rsu_pk: rsu_pk.to_vec(), inline_point };
        Ok((req, session))
    }

    /// Checks `S3`, derives `Ks`, swaps `(pID, D)` and emits `ACK`.
    /// On any failure the pseudonym state is left untouched.
    pub fn handle_reply(&mut self, session: &VnSession, rep: &AuthReply, now_ms: u64) -> Result<VnOutcome, VnError> {
        let cred = self.credential.as_mut().ok_or(VnError::NotRegistered)?;
        if !rep.t2.is_fresh(Timestamp::from_ms(now_ms), self.config.freshness_ms) {
            return Err(VnError::StaleTimestamp);
        }
        let m = h3(&cred.ch, &session.d, &session.beta, session.t1.0);
        let mut plain: [u8; S2_BYTES] = sym_decrypt(&m, &rep.s2, CTX_S2).try_into().expect("length preserving");
        let parsed = parse_s2(&plain);
        plain.zeroize();
        let (mut beta_rsu, pid_next, d_next) = parsed.ok_or(VnError::BadKeyConfirm)?;
        let ks = h4(&beta_rsu, &m, rep.t2.0);
        let s3 = h5(&rep.s2, &beta_rsu, &pid_next.0, &d_next, &m, &ks, rep.t2.0);
        beta_rsu.zeroize();
        if !s3.ct_eq(&rep.s3) {
            return Err(VnError::BadKeyConfirm);
        }
        cred.pid = pid_next;
        cred.d = d_next;
        let rep_bytes: [u8; REP_BYTES] = rep.encode();
        let ack = AuthAck { ack: h6(&m, &ks, &session.req, &rep_bytes) };
        self.last_ks = Some(ks.clone());
        self.last_peer = Some(session.rsu_pk.clone());
        Ok(VnOutcome { ack, ks })
    }

    /// Applies `S_upd = SEN_Ks(pID' ‖ D')` from the last confirmed session.
    pub fn apply_update(&mut self, update: &UpdateMsg) -> Result<(), VnError> {
        let ks = self.last_ks.as_ref().ok_or(VnError::NoEstablishedSession)?;
        let cred = self.credential.as_mut().ok_or(VnError::NotRegistered)?;
        let mut plain = sym_decrypt(ks, &update.s_upd, CTX_UPDATE);
        cred.pid = Pid(plain[..PID_LEN].try_into().expect("width"));
        let d: [u8; HASH_LEN] = plain[PID_LEN..].try_into().expect("width");
        cred.d = SymKey::from_bytes(d);
        plain.zeroize();
        Ok(())
    }

    /// [`Vehicle::apply_update`] guarded by the sender's key. `S_upd` carries no
    /// integrity tag, so an update from an RSU other than the last one would
    /// decrypt to garbage under `last_ks`; it is refused instead.
    pub fn apply_update_from(&mut self, rsu_pk: &[u8], update: &UpdateMsg) -> Result<(), VnError> {
        if self.last_peer.as_deref() != Some(rsu_pk) {
            return Err(VnError::NoEstablishedSession);
        }
        self.apply_update(update)
    }

    /// The session key of the last confirmed handover.
    pub fn last_session_key(&self) -> Option<&SymKey> {
        self.last_ks.as_ref()
    }
}
