//! The regional service manager: a full ledger node that relays registrations,
//! mints pseudo-identities and posts revocations for its domain.

use std::sync::{Arc, RwLock};

use rand::{CryptoRng, RngCore};

use crate::crypto::group::GroupPoint;
use crate::ledger::{Ledger, LedgerError, LedgerView, Revoker, TxId};
use crate::wire::RegistrationReply;

use super::error::RegistrationError;
use super::lea::{Lea, LeaReceipt};
use super::params::{GroupKeys, GroupSecret, SharedView};

pub struct Rsm {
    id: String,
    group: GroupKeys,
    ledger: Ledger,
    revoker: Revoker,
    view: SharedView,
}

impl std::fmt::Debug for Rsm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Rsm({}, epoch={})", self.id, self.group.epoch())
    }
}

/// Joins a domain manager to the LEA's current epoch.
pub fn rsm_init(lea: &Lea, id: impl Into<String>, revoker: Revoker, sync_delay_ms: u64) -> Rsm {
    let id = id.into();
    Rsm {
        view: Arc::new(RwLock::new(LedgerView::new(id.clone(), sync_delay_ms))),
        id,
        group: lea.group_secret().keys(),
        ledger: lea.ledger().clone(),
        revoker,
    }
}

impl Rsm {
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn epoch(&self) -> u64 {
        self.group.epoch()
    }

    pub fn group_secret(&self) -> &GroupSecret {
        self.group.secret()
    }

    /// Handle given to the RSUs of this domain.
    pub fn view(&self) -> SharedView {
        Arc::clone(&self.view)
    }

    pub fn pump(&self, now_ms: u64) -> usize {
        self.view.write().expect("view lock poisoned").pump(&self.ledger, now_ms)
    }

    pub fn sync_all(&self) {
        self.view.write().expect("view lock poisoned").sync_all(&self.ledger);
    }

    /// Forwards `C1` to the LEA, then mints `(PD, pID, D)` for the new vehicle.
    pub fn handle_registration(
        &mut self,
        c1: &[u8],
        lea: &mut Lea,
        now_ms: u64,
        rng: &mut (impl RngCore + CryptoRng),
    ) -> Result<RegistrationReply, RegistrationError> {
        let receipt = lea.register(c1, now_ms)?;
        Ok(self.complete_registration(&receipt, rng))
    }

    /// Second half of [`Rsm::handle_registration`] for when the LEA round trip is asynchronous.
    pub fn complete_registration(&self, receipt: &LeaReceipt, rng: &mut (impl RngCore + CryptoRng)) -> RegistrationReply {
        let (_pd, pid, d) = self.group.mint_pseudonym(rng, None);
        RegistrationReply { txid: receipt.txid, sigma: receipt.sigma, t_exp: receipt.t_exp, pid, d }
    }

    pub fn revoke(&self, ch: GroupPoint, now_ms: u64) -> Result<TxId, LedgerError> {
        self.ledger.append_revocation(&self.revoker, ch, now_ms)
    }

    /// Replaces the epoch; the old secret is dropped (and zeroized).
    pub fn install_group(&mut self, secret: GroupSecret) {
        self.group = secret.keys();
    }
}
