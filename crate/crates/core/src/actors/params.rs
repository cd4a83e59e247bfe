//! Published system parameters, protocol timing and the shared group secret.

use std::collections::BTreeMap;
use std::sync::{Arc, RwLock};

use rand::{CryptoRng, RngCore};
use zeroize::{Zeroize, ZeroizeOnDrop};

use crate::crypto::group::{GroupPoint, NonZeroScalar, Scalar};
use crate::crypto::hash::{h1, HashTag, SymKey, HASH_LEN};
use crate::crypto::pke::{EncryptionKey, VerifyingKey, PUBLIC_KEY_BYTES};
use crate::crypto::symmetric::{PidCipher, PID_LEN};
use crate::ledger::LedgerView;
use crate::wire::Pid;

pub const DEFAULT_FRESHNESS_MS: u32 = 500;
pub const DEFAULT_REGISTRATION_TTL_MS: u64 = 30 * 24 * 60 * 60 * 1000;
pub const CURVE_NAME: &str = "P-224";
pub const LAMBDA_BITS: u32 = (HASH_LEN * 8) as u32;

/// Symmetric keystream contexts. Each key is used at most once per context.
pub const CTX_S1: &[u8] = b"S1";
pub const CTX_S2: &[u8] = b"S2";
pub const CTX_UPDATE: &[u8] = b"Supd";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProtocolConfig {
    /// Δ: accepted `|now − T|` for T1 and T2.
    pub freshness_ms: u32,
    pub registration_ttl_ms: u64,
    /// Must be at least `2Δ`.
    pub replay_retention_ms: u64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self::with_freshness(DEFAULT_FRESHNESS_MS)
    }
}

impl ProtocolConfig {
    pub fn with_freshness(freshness_ms: u32) -> Self {
        Self {
            freshness_ms,
            registration_ttl_ms: DEFAULT_REGISTRATION_TTL_MS,
            replay_retention_ms: 2 * freshness_ms as u64,
        }
    }
}

/// Everything the LEA publishes. Holds no secret material.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemParams {
    pub curve: &'static str,
    pub lambda_bits: u32,
    pub generator: GroupPoint,
    pub hash_tags: [HashTag; 7],
    pub lea_sig_pk: VerifyingKey,
    pub lea_enc_pk: EncryptionKey,
}

impl SystemParams {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&(self.curve.len() as u32).to_be_bytes());
        out.extend_from_slice(self.curve.as_bytes());
        out.extend_from_slice(&self.lambda_bits.to_be_bytes());
        out.extend_from_slice(&self.generator.to_compressed());
        out.extend(self.hash_tags.iter().map(|t| t.id()));
        out.extend_from_slice(&self.lea_sig_pk.to_bytes());
        out.extend_from_slice(&self.lea_enc_pk.to_bytes());
        out
    }
}

/// `ID ‖ CH ‖ T_Exp` as signed by the LEA, with `ID` length-prefixed.
pub fn registration_message(id: &[u8], ch: &GroupPoint, t_exp: u64) -> Vec<u8> {
    let mut out = Vec::with_capacity(4 + id.len() + 29 + 8);
    out.extend_from_slice(&(id.len() as u32).to_be_bytes());
    out.extend_from_slice(id);
    out.extend_from_slice(&ch.to_compressed());
    out.extend_from_slice(&t_exp.to_be_bytes());
    out
}

/// `(GK, b)` for one epoch.
#[derive(Clone, Zeroize, ZeroizeOnDrop)]
pub struct GroupSecret {
    gk: Scalar,
    b: Scalar,
    #[zeroize(skip)]
    epoch: u64,
}

impl std::fmt::Debug for GroupSecret {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GroupSecret(epoch={}, ..)", self.epoch)
    }
}

impl GroupSecret {
    pub fn random(epoch: u64, rng: &mut (impl RngCore + CryptoRng)) -> Self {
        Self { gk: NonZeroScalar::random(rng).get(), b: NonZeroScalar::random(rng).get(), epoch }
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn gk(&self) -> &Scalar {
        &self.gk
    }

    pub fn b(&self) -> &Scalar {
        &self.b
    }

    pub fn keys(&self) -> GroupKeys {
        GroupKeys { secret: self.clone(), cipher: PidCipher::new(&self.b) }
    }
}

/// A group secret with its pseudo-identity cipher expanded once.
#[derive(Clone, Debug)]
pub struct GroupKeys {
    secret: GroupSecret,
    cipher: PidCipher,
}

impl GroupKeys {
    pub fn epoch(&self) -> u64 {
        self.secret.epoch
    }

    pub fn secret(&self) -> &GroupSecret {
        &self.secret
    }

    pub fn open_pid(&self, pid: &Pid) -> [u8; PID_LEN] {
        self.cipher.decrypt(&pid.0)
    }

    /// `D = H1(PD, GK, b, pID)`.
    pub fn derive_d(&self, pd: &[u8; PID_LEN], pid: &Pid) -> SymKey {
        h1(pd, &self.secret.gk, &self.secret.b, &pid.0)
    }

    /// Fresh `(PD, pID, D)` with `PD ≠ avoid`.
    pub fn mint_pseudonym(
        &self,
        rng: &mut (impl RngCore + CryptoRng),
        avoid: Option<&[u8; PID_LEN]>,
    ) -> ([u8; PID_LEN], Pid, SymKey) {
        let mut pd = [0u8; PID_LEN];
        loop {
            rng.fill_bytes(&mut pd);
            if avoid != Some(&pd) {
                break;
            }
        }
        let pid = Pid(self.cipher.encrypt(&pd));
        let d = self.derive_d(&pd, &pid);
        (pd, pid, d)
    }
}

/// An RSM's ledger view, read by every RSU in its domain.
pub type SharedView = Arc<RwLock<LedgerView>>;

/// Broadcast directory of RSU signing keys.
#[derive(Clone, Debug, Default)]
pub struct Directory {
    rsus: BTreeMap<String, VerifyingKey>,
}

impl Directory {
    pub fn publish(&mut self, rsu_id: impl Into<String>, pk: VerifyingKey) {
        self.rsus.insert(rsu_id.into(), pk);
    }

    pub fn rsu_key(&self, rsu_id: &str) -> Option<&VerifyingKey> {
        self.rsus.get(rsu_id)
    }

    pub fn rsu_key_bytes(&self, rsu_id: &str) -> Option<[u8; PUBLIC_KEY_BYTES]> {
        self.rsus.get(rsu_id).map(VerifyingKey::to_bytes)
    }
}
