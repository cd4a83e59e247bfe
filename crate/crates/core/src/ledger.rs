//! In-process append-only ledger shared by the LEA and the RSMs.
//!
//! The canonical log is a single shared vector. Each node reads it through a
//! [`LedgerView`] that only applies entries older than its sync delay, so
//! views lag the log by a configurable amount and converge at quiescence.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use sha3::{Digest as _, Sha3_256};
use thiserror::Error;

use crate::crypto::group::{GroupPoint, COMPRESSED_POINT_BYTES};
use crate::crypto::pke::{Signature, SIGNATURE_BYTES};
use crate::wire::TXID_BYTES;

pub type TxId = [u8; TXID_BYTES];
type ChKey = [u8; COMPRESSED_POINT_BYTES];

static NEXT_LEDGER_ID: AtomicU64 = AtomicU64::new(1);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LedgerError {
    #[error("commitment already has a live registration")]
    DuplicateRegistration,
    #[error("capability does not permit this append")]
    Unauthorized,
    #[error("snapshot line {line}: {reason}")]
    Snapshot { line: usize, reason: String },
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum LookupError {
    #[error("no registration for this commitment")]
    Unknown,
    #[error("registration revoked")]
    Revoked,
    #[error("registration expired")]
    Expired,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LedgerPayload {
    Registration { sigma: Signature, ch: GroupPoint, t_exp: u64 },
    Revocation { ch: GroupPoint },
}

impl LedgerPayload {
    pub fn ch(&self) -> &GroupPoint {
        match self {
            Self::Registration { ch, .. } | Self::Revocation { ch } => ch,
        }
    }

    /// Kind byte, then fixed-width fields.
    pub fn to_bytes(&self) -> Vec<u8> {
        match self {
            Self::Registration { sigma, ch, t_exp } => {
                let mut out = Vec::with_capacity(1 + SIGNATURE_BYTES + COMPRESSED_POINT_BYTES + 8);
                out.push(0x01);
                out.extend_from_slice(&sigma.0);
                out.extend_from_slice(&ch.to_compressed());
                out.extend_from_slice(&t_exp.to_be_bytes());
                out
            }
            Self::Revocation { ch } => {
                let mut out = Vec::with_capacity(1 + COMPRESSED_POINT_BYTES);
                out.push(0x02);
                out.extend_from_slice(&ch.to_compressed());
                out
            }
        }
    }
}

/// `SHA3-256(payload ‖ height)`.
pub fn compute_txid(payload: &LedgerPayload, height: u64) -> TxId {
    let mut h = Sha3_256::new();
    h.update(payload.to_bytes());
    h.update(height.to_be_bytes());
    h.finalize().into()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LedgerTx {
    pub txid: TxId,
    pub payload: LedgerPayload,
    pub height: u64,
    pub timestamp_ms: u64,
}

/// Permission to append registrations. Held by the LEA.
#[derive(Debug)]
pub struct Registrar {
    ledger_id: u64,
}

/// Permission to append revocations. Held by every RSM.
#[derive(Clone, Debug)]
pub struct Revoker {
    ledger_id: u64,
}

pub enum Capability<'a> {
    Registrar(&'a Registrar),
    Revoker(&'a Revoker),
}

#[derive(Default)]
struct Inner {
    log: Vec<LedgerTx>,
    by_txid: HashMap<TxId, usize>,
    /// Latest registration expiry per commitment, cleared by revocation.
    live: HashMap<ChKey, u64>,
}

/// Shared handle to the canonical log.
#[derive(Clone)]
pub struct Ledger {
    id: u64,
    inner: Arc<RwLock<Inner>>,
}

impl fmt::Debug for Ledger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ledger(id={}, height={})", self.id, self.height())
    }
}

impl Ledger {
    pub fn genesis() -> (Self, Registrar, Revoker) {
        let id = NEXT_LEDGER_ID.fetch_add(1, Ordering::Relaxed);
        let ledger = Self { id, inner: Arc::new(RwLock::new(Inner::default())) };
        (ledger, Registrar { ledger_id: id }, Revoker { ledger_id: id })
    }

    pub fn append(&self, cap: Capability<'_>, payload: LedgerPayload, now_ms: u64) -> Result<TxId, LedgerError> {
        let allowed = match (&cap, &payload) {
            (Capability::Registrar(r), LedgerPayload::Registration { .. }) => r.ledger_id == self.id,
            (Capability::Revoker(r), LedgerPayload::Revocation { .. }) => r.ledger_id == self.id,
            _ => false,
        };
        if !allowed {
            return Err(LedgerError::Unauthorized);
        }
        let mut inner = self.inner.write().expect("ledger lock poisoned");
        let key = payload.ch().to_compressed();
        match payload {
            LedgerPayload::Registration { t_exp, .. } => {
                if inner.live.get(&key).is_some_and(|&exp| exp > now_ms) {
                    return Err(LedgerError::DuplicateRegistration);
                }
                inner.live.insert(key, t_exp);
            }
            LedgerPayload::Revocation { .. } => {
                inner.live.remove(&key);
            }
        }
        Ok(inner.push(payload, now_ms))
    }

    pub fn append_registration(&self, cap: &Registrar, payload: LedgerPayload, now_ms: u64) -> Result<TxId, LedgerError> {
        self.append(Capability::Registrar(cap), payload, now_ms)
    }

    pub fn append_revocation(&self, cap: &Revoker, ch: GroupPoint, now_ms: u64) -> Result<TxId, LedgerError> {
        self.append(Capability::Revoker(cap), LedgerPayload::Revocation { ch }, now_ms)
    }

    pub fn height(&self) -> u64 {
        self.inner.read().expect("ledger lock poisoned").log.len() as u64
    }

    pub fn get(&self, txid: &TxId) -> Option<LedgerTx> {
        let inner = self.inner.read().expect("ledger lock poisoned");
        inner.by_txid.get(txid).map(|&i| inner.log[i])
    }

    /// Entries with height in `[from, ..)`.
    pub fn entries_from(&self, from: u64) -> Vec<LedgerTx> {
        let inner = self.inner.read().expect("ledger lock poisoned");
        inner.log.get(from as usize..).map(<[_]>::to_vec).unwrap_or_default()
    }

    /// True iff `txid` is on the log and is the content hash of `payload` at its height.
    pub fn verify_inclusion(&self, txid: &TxId, payload: &LedgerPayload) -> bool {
        match self.get(txid) {
            Some(tx) => compute_txid(payload, tx.height) == *txid && tx.payload == *payload,
            None => false,
        }
    }

    /// One line per entry: `height txid timestamp reg sigma ch t_exp` or `height txid timestamp rev ch`.
    pub fn export_snapshot(&self) -> String {
        let inner = self.inner.read().expect("ledger lock poisoned");
        let mut out = String::new();
        for tx in &inner.log {
            let body = match &tx.payload {
                LedgerPayload::Registration { sigma, ch, t_exp } => {
                    format!("reg {} {} {}", hex::encode(sigma.0), hex::encode(ch.to_compressed()), t_exp)
                }
                LedgerPayload::Revocation { ch } => format!("rev {}", hex::encode(ch.to_compressed())),
            };
            out.push_str(&format!("{} {} {} {}\n", tx.height, hex::encode(tx.txid), tx.timestamp_ms, body));
        }
        out
    }

    /// Rebuilds a ledger from [`Ledger::export_snapshot`] output, checking every txid.
    pub fn import_snapshot(text: &str) -> Result<(Self, Registrar, Revoker), LedgerError> {
        let (ledger, registrar, revoker) = Self::genesis();
        {
            let mut inner = ledger.inner.write().expect("ledger lock poisoned");
            for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
                let err = |reason: &str| LedgerError::Snapshot { line: n + 1, reason: reason.to_string() };
                let f: Vec<&str> = line.split_whitespace().collect();
                if f.len() < 5 {
                    return Err(err("too few fields"));
                }
                let height: u64 = f[0].parse().map_err(|_| err("bad height"))?;
                if height != inner.log.len() as u64 {
                    return Err(err("heights must be contiguous from 0"));
                }
                let txid: TxId = hex::decode(f[1])
                    .ok()
                    .and_then(|v| v.try_into().ok())
                    .ok_or_else(|| err("bad txid"))?;
                let timestamp_ms: u64 = f[2].parse().map_err(|_| err("bad timestamp"))?;
                let point = |s: &str| -> Result<GroupPoint, LedgerError> {
                    let bytes: ChKey = hex::decode(s).ok().and_then(|v| v.try_into().ok()).ok_or_else(|| err("bad point"))?;
                    GroupPoint::from_compressed(&bytes).map_err(|_| err("point not on curve"))
                };
                let payload = match (f[3], f.len()) {
                    ("reg", 7) => LedgerPayload::Registration {
                        sigma: Signature(
                            hex::decode(f[4]).ok().and_then(|v| v.try_into().ok()).ok_or_else(|| err("bad signature"))?,
                        ),
                        ch: point(f[5])?,
                        t_exp: f[6].parse().map_err(|_| err("bad expiry"))?,
                    },
                    ("rev", 5) => LedgerPayload::Revocation { ch: point(f[4])? },
                    _ => return Err(err("unknown record kind")),
                };
                if compute_txid(&payload, height) != txid {
                    return Err(err("txid does not match payload"));
                }
                let key = payload.ch().to_compressed();
                match payload {
                    LedgerPayload::Registration { t_exp, .. } => {
                        inner.live.insert(key, t_exp);
                    }
                    LedgerPayload::Revocation { .. } => {
                        inner.live.remove(&key);
                    }
                }
                inner.push(payload, timestamp_ms);
            }
        }
        Ok((ledger, registrar, revoker))
    }
}

impl Inner {
    fn push(&mut self, payload: LedgerPayload, now_ms: u64) -> TxId {
        let height = self.log.len() as u64;
        let txid = compute_txid(&payload, height);
        self.by_txid.insert(txid, self.log.len());
        self.log.push(LedgerTx { txid, payload, height, timestamp_ms: now_ms });
        txid
    }
}

/// A node's lagging copy of the log.
#[derive(Clone, Debug)]
pub struct LedgerView {
    node_id: String,
    sync_delay_ms: u64,
    entries: Vec<LedgerTx>,
    by_ch: HashMap<ChKey, usize>,
    revoked: HashSet<ChKey>,
}

impl LedgerView {
    pub fn new(node_id: impl Into<String>, sync_delay_ms: u64) -> Self {
        Self {
            node_id: node_id.into(),
            sync_delay_ms,
            entries: Vec::new(),
            by_ch: HashMap::new(),
            revoked: HashSet::new(),
        }
    }

    pub fn node_id(&self) -> &str {
        &self.node_id
    }

    pub fn applied_height(&self) -> u64 {
        self.entries.len() as u64
    }

    pub fn entries(&self) -> &[LedgerTx] {
        &self.entries
    }

    /// Applies, in order, every pending entry appended at least `sync_delay_ms` before `now_ms`.
    pub fn pump(&mut self, ledger: &Ledger, now_ms: u64) -> usize {
        let pending = ledger.entries_from(self.applied_height());
        let mut applied = 0;
        for tx in pending {
            if tx.timestamp_ms.saturating_add(self.sync_delay_ms) > now_ms {
                break;
            }
            self.apply(tx);
            applied += 1;
        }
        applied
    }

    /// Applies everything on the log regardless of delay.
    pub fn sync_all(&mut self, ledger: &Ledger) {
        for tx in ledger.entries_from(self.applied_height()) {
            self.apply(tx);
        }
    }

    fn apply(&mut self, tx: LedgerTx) {
        let key = tx.payload.ch().to_compressed();
        match tx.payload {
            LedgerPayload::Registration { .. } => {
                self.revoked.remove(&key);
                self.by_ch.insert(key, self.entries.len());
            }
            LedgerPayload::Revocation { .. } => {
                self.revoked.insert(key);
            }
        }
        self.entries.push(tx);
    }

    /// The latest registration for `ch` that has not expired at `now_ms`.
    pub fn find_by_ch(&self, ch: &GroupPoint, now_ms: u64) -> Option<&LedgerTx> {
        let tx = &self.entries[*self.by_ch.get(&ch.to_compressed())?];
        match tx.payload {
            LedgerPayload::Registration { t_exp, .. } if t_exp > now_ms => Some(tx),
            _ => None,
        }
    }

    pub fn is_revoked(&self, ch: &GroupPoint) -> bool {
        self.revoked.contains(&ch.to_compressed())
    }

    /// A registration usable for authentication: present, unrevoked and unexpired.
    pub fn lookup_live(&self, ch: &GroupPoint, now_ms: u64) -> Result<&LedgerTx, LookupError> {
        let key = ch.to_compressed();
        let Some(&i) = self.by_ch.get(&key) else {
            return Err(LookupError::Unknown);
        };
        if self.revoked.contains(&key) {
            return Err(LookupError::Revoked);
        }
        let tx = &self.entries[i];
        match tx.payload {
            LedgerPayload::Registration { t_exp, .. } if t_exp > now_ms => Ok(tx),
            _ => Err(LookupError::Expired),
        }
    }

    pub fn get(&self, txid: &TxId) -> Option<&LedgerTx> {
        self.entries.iter().find(|tx| &tx.txid == txid)
    }
}
