//! Group-key rotation across a whole deployment.

use rand::{CryptoRng, RngCore};

use crate::wire::UpdateMsg;

use super::lea::Lea;
use super::rsm::Rsm;
use super::rsu::{Rsu, SessionId};

#[derive(Debug)]
pub struct RotationOutcome {
    pub epoch: u64,
    /// `(rsu id, session, S_upd)` for every surviving established session.
    pub updates: Vec<(String, SessionId, UpdateMsg)>,
}

/// The LEA mints `(GK', b')`, every RSM and RSU installs it, and each RSU
/// emits pseudonym updates for its unrevoked confirmed sessions.
///
/// Revocations must already be on the ledger; RSM views are synced here so
/// the RSUs see them.
pub fn rotate_group_key(
    lea: &mut Lea,
    rsms: &mut [&mut Rsm],
    rsus: &mut [&mut Rsu],
    rng: &mut (impl RngCore + CryptoRng),
) -> RotationOutcome {
    let secret = lea.rotate(rng);
    for rsm in rsms.iter_mut() {
        rsm.sync_all();
        rsm.install_group(secret.clone());
    }
    let mut updates = Vec::new();
    for rsu in rsus.iter_mut() {
        let id = rsu.id().to_string();
        for (sid, msg) in rsu.rotate(secret.clone(), rng) {
            updates.push((id.clone(), sid, msg));
        }
    }
    RotationOutcome { epoch: secret.epoch(), updates }
}
