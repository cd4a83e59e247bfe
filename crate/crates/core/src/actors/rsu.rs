//! The roadside unit: verifies handover requests against the ledger and
//! establishes session keys.
//!
//! Request handling is split in two. [`Rsu::verify_request`] takes `&self` and
//! does all the cryptography, so many requests can be verified in parallel.
//! [`Rsu::commit`] then applies the replay cache and records the session.

use std::collections::{BTreeMap, HashMap, VecDeque};

use rand::{CryptoRng, RngCore};

use crate::crypto::group::{GroupPoint, NonZeroScalar, Scalar, SCALAR_BYTES};
use crate::crypto::hash::{h3, h4, h5, h6, SymKey};
use crate::crypto::pke::{keygen_sig, SigningKey, VerifyingKey, PUBLIC_KEY_BYTES};
use crate::crypto::symmetric::{sym_encrypt, PID_LEN};
use crate::ledger::LookupError;
use crate::wire::{AuthAck, AuthReply, AuthRequest, Pid, Timestamp, UpdateMsg, REP_BYTES, REQ_BYTES, S2_BYTES};

use super::error::RsuError;
use super::lea::Evidence;
use super::open::open_request;
use super::params::{GroupKeys, GroupSecret, ProtocolConfig, SharedView, CTX_S2, CTX_UPDATE};
use super::rsm::Rsm;

pub type SessionId = u64;

/// Output of the parallelizable verification stage.
pub struct VerifiedRequest {
    pid: Pid,
    t1: Timestamp,
    ch: GroupPoint,
    m_star: SymKey,
    ks: SymKey,
    req: [u8; REQ_BYTES],
    reply: AuthReply,
}

impl VerifiedRequest {
    pub fn reply(&self) -> &AuthReply {
        &self.reply
    }
}

struct PendingSession {
    ch: GroupPoint,
    m_star: SymKey,
    ks: SymKey,
    req: [u8; REQ_BYTES],
    rep: [u8; REP_BYTES],
}

/// A confirmed session, kept so the RSU can push pseudonym updates on rotation.
#[derive(Clone, Debug)]
pub struct EstablishedSession {
    pub ch: GroupPoint,
    pub ks: SymKey,
}

/// `(pID, T1)` pairs accepted within the retention window.
#[derive(Debug, Default)]
struct ReplayCache {
    seen: HashMap<(Pid, Timestamp), u64>,
    order: VecDeque<(u64, Pid, Timestamp)>,
}

impl ReplayCache {
    fn prune(&mut self, now_ms: u64, retention_ms: u64) {
        while let Some(&(at, pid, t1)) = self.order.front() {
            if at + retention_ms > now_ms {
                break;
            }
            self.order.pop_front();
            if self.seen.get(&(pid, t1)) == Some(&at) {
                self.seen.remove(&(pid, t1));
            }
        }
    }

    fn contains(&self, pid: Pid, t1: Timestamp) -> bool {
        self.seen.contains_key(&(pid, t1))
    }

    fn insert(&mut self, pid: Pid, t1: Timestamp, now_ms: u64) {
        self.seen.insert((pid, t1), now_ms);
        self.order.push_back((now_ms, pid, t1));
    }
}

pub struct Rsu {
    id: String,
    sig_sk: SigningKey,
    sig_pk: VerifyingKey,
    pk_bytes: [u8; PUBLIC_KEY_BYTES],
    group: GroupKeys,
    view: SharedView,
    config: ProtocolConfig,
    replay: ReplayCache,
    next_session: SessionId,
    pending: HashMap<SessionId, PendingSession>,
    established: BTreeMap<SessionId, EstablishedSession>,
}

impl std::fmt::Debug for Rsu {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Rsu({}, epoch={}, established={})", self.id, self.group.epoch(), self.established.len())
    }
}

/// Provisions an RSU under `rsm`: fresh signing key, the domain's group secret and ledger view.
pub fn rsu_init(rsm: &Rsm, id: impl Into<String>, config: ProtocolConfig, rng: &mut (impl RngCore + CryptoRng)) -> Rsu {
    let (sig_sk, sig_pk) = keygen_sig(rng);
    Rsu {
        id: id.into(),
        pk_bytes: sig_pk.to_bytes(),
        sig_sk,
        sig_pk,
        group: rsm.group_secret().keys(),
        view: rsm.view(),
        config,
        replay: ReplayCache::default(),
        next_session: 1,
        pending: HashMap::new(),
        established: BTreeMap::new(),
    }
}

impl Rsu {
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn verifying_key(&self) -> VerifyingKey {
        self.sig_pk
    }

    /// The `pk_RSU` bytes bound into `γ`.
    pub fn pk_bytes(&self) -> &[u8; PUBLIC_KEY_BYTES] {
        &self.pk_bytes
    }

    pub fn epoch(&self) -> u64 {
        self.group.epoch()
    }

    pub fn established_sessions(&self) -> &BTreeMap<SessionId, EstablishedSession> {
        &self.established
    }

    /// Freshness, commitment recomputation, ledger lookup and reply construction.
    pub fn verify_request(
        &self,
        req: &AuthRequest,
        now_ms: u64,
        rng: &mut (impl RngCore + CryptoRng),
    ) -> Result<VerifiedRequest, RsuError> {
        let now = Timestamp::from_ms(now_ms);
        if !req.t1.is_fresh(now, self.config.freshness_ms) {
            return Err(RsuError::StaleTimestamp);
        }
        let opened = open_request(&self.group, req, &self.pk_bytes).ok_or(RsuError::UnknownCredential)?;
        {
            let view = self.view.read().expect("view lock poisoned");
            view.lookup_live(&opened.ch, now_ms).map_err(|e| match e {
                LookupError::Unknown => RsuError::UnknownCredential,
                LookupError::Revoked => RsuError::RevokedCredential,
                LookupError::Expired => RsuError::ExpiredRegistration,
            })?;
        }
        let (_pd_next, pid_next, d_next) = self.group.mint_pseudonym(rng, Some(&opened.pd));
        let m_star = h3(&opened.ch, &opened.d, &opened.beta, req.t1.0);
        let beta_rsu = NonZeroScalar::random(rng).get();
        let t2 = now;
        let ks = h4(&beta_rsu, &m_star, t2.0);

        let mut plain = [0u8; S2_BYTES];
        plain[..SCALAR_BYTES].copy_from_slice(&beta_rsu.to_be_bytes());
        plain[SCALAR_BYTES..SCALAR_BYTES + PID_LEN].copy_from_slice(&pid_next.0);
        plain[SCALAR_BYTES + PID_LEN..].copy_from_slice(d_next.as_bytes());
        let s2: [u8; S2_BYTES] = sym_encrypt(&m_star, &plain, CTX_S2).try_into().expect("length preserving");
        zeroize::Zeroize::zeroize(&mut plain);
        let s3 = h5(&s2, &beta_rsu, &pid_next.0, &d_next, &m_star, &ks, t2.0);

        Ok(VerifiedRequest {
            pid: req.pid,
            t1: req.t1,
            ch: opened.ch,
            m_star,
            ks,
            req: req.encode(),
            reply: AuthReply { s2, s3, t2 },
        })
    }

    /// Replay check and session bookkeeping for a verified request.
    pub fn commit(&mut self, verified: VerifiedRequest, now_ms: u64) -> Result<(SessionId, AuthReply), RsuError> {
        self.replay.prune(now_ms, self.config.replay_retention_ms);
        if self.replay.contains(verified.pid, verified.t1) {
            return Err(RsuError::ReplayDetected);
        }
        self.replay.insert(verified.pid, verified.t1, now_ms);
        let sid = self.next_session;
        self.next_session += 1;
        let reply = verified.reply;
        self.pending.insert(
            sid,
            PendingSession {
                ch: verified.ch,
                m_star: verified.m_star,
                ks: verified.ks,
                req: verified.req,
                rep: reply.encode(),
            },
        );
        Ok((sid, reply))
    }

    /// Both stages. Already-seen `(pID, T1)` pairs are rejected before any curve work.
    pub fn handle_request(
        &mut self,
        req: &AuthRequest,
        now_ms: u64,
        rng: &mut (impl RngCore + CryptoRng),
    ) -> Result<(SessionId, AuthReply), RsuError> {
        self.replay.prune(now_ms, self.config.replay_retention_ms);
        if req.t1.is_fresh(Timestamp::from_ms(now_ms), self.config.freshness_ms) && self.replay.contains(req.pid, req.t1) {
            return Err(RsuError::ReplayDetected);
        }
        let verified = self.verify_request(req, now_ms, rng)?;
        self.commit(verified, now_ms)
    }

    pub fn handle_request_bytes(
        &mut self,
        bytes: &[u8],
        now_ms: u64,
        rng: &mut (impl RngCore + CryptoRng),
    ) -> Result<(SessionId, AuthReply), RsuError> {
        let req = AuthRequest::decode(bytes)?;
        self.handle_request(&req, now_ms, rng)
    }

    /// Confirms `ACK = H6(M*, Ks, REQ, REP)` and returns the session key.
    pub fn handle_ack(&mut self, sid: SessionId, ack: &AuthAck) -> Result<SymKey, RsuError> {
        let session = self.pending.get(&sid).ok_or(RsuError::BadAck)?;
        let expected = h6(&session.m_star, &session.ks, &session.req, &session.rep);
        if !expected.ct_eq(&ack.ack) {
            return Err(RsuError::BadAck);
        }
        let session = self.pending.remove(&sid).expect("checked above");
        let ks = session.ks.clone();
        self.established.insert(sid, EstablishedSession { ch: session.ch, ks: session.ks });
        Ok(ks)
    }

    pub fn handle_ack_bytes(&mut self, sid: SessionId, bytes: &[u8]) -> Result<SymKey, RsuError> {
        let ack = AuthAck::decode(bytes)?;
        self.handle_ack(sid, &ack)
    }

    /// Signs the raw request so the LEA can trace it.
    pub fn report_malicious(&self, req: &AuthRequest) -> Evidence {
        let bytes = req.encode();
        Evidence { rsu_id: self.id.clone(), req: bytes, sigma_rt: self.sig_sk.sign(&bytes) }
    }

    /// Installs a new epoch and returns `S_upd` for every established session whose
    /// commitment is not revoked in the domain view. Pending sessions are dropped.
    pub fn rotate(&mut self, secret: GroupSecret, rng: &mut (impl RngCore + CryptoRng)) -> Vec<(SessionId, UpdateMsg)> {
        self.group = secret.keys();
        self.pending.clear();
        self.replay = ReplayCache::default();
        let view = self.view.read().expect("view lock poisoned");
        self.established.retain(|_, s| !view.is_revoked(&s.ch));
        let mut updates = Vec::with_capacity(self.established.len());
        for (&sid, session) in &self.established {
            let (_pd, pid, d) = self.group.mint_pseudonym(rng, None);
            let mut plain = [0u8; PID_LEN + crate::crypto::hash::HASH_LEN];
            plain[..PID_LEN].copy_from_slice(&pid.0);
            plain[PID_LEN..].copy_from_slice(d.as_bytes());
            let s_upd = sym_encrypt(&session.ks, &plain, CTX_UPDATE).try_into().expect("length preserving");
            zeroize::Zeroize::zeroize(&mut plain);
            updates.push((sid, UpdateMsg { s_upd }));
        }
        updates
    }

    /// Drops all confirmed sessions, as when vehicles leave coverage.
    pub fn forget_sessions(&mut self) {
        self.established.clear();
    }
}

/// `β_RSU` parsed from a decrypted `S2`; used by the vehicle.
pub(crate) fn parse_s2(plain: &[u8; S2_BYTES]) -> Option<(Scalar, Pid, SymKey)> {
    let beta: Scalar = Option::from(Scalar::from_be_bytes(plain[..SCALAR_BYTES].try_into().expect("width")))?;
    let pid = Pid(plain[SCALAR_BYTES..SCALAR_BYTES + PID_LEN].try_into().expect("width"));
    let d = SymKey::from_bytes(plain[SCALAR_BYTES + PID_LEN..].try_into().expect("width"));
    Some((beta, pid, d))
}
