//! Recomputing the commitment behind an authentication request.
//!
//! The RSU, the LEA's trace and the public audit all run the same steps:
//! recover `D*`, decrypt `β*` from `S1`, rebuild `γ*` and evaluate
//! `CH' = m·P + γ*·A`.

use crate::crypto::group::{msm2, GroupPoint, NonZeroScalar, Scalar, SCALAR_BYTES};
use crate::crypto::hash::{h2, SymKey};
use crate::crypto::symmetric::{sym_decrypt, PID_LEN};
use crate::wire::AuthRequest;

use super::params::{GroupKeys, CTX_S1};

pub struct OpenedRequest {
    pub pd: [u8; PID_LEN],
    pub d: SymKey,
    pub beta: Scalar,
    pub gamma: NonZeroScalar,
    pub ch: GroupPoint,
}

/// `β*`, `γ*` and `CH'` given the disclosed `D*`. `None` when `β*` is not a reduced scalar.
pub fn open_with_key(req: &AuthRequest, d: &SymKey, rsu_pk: &[u8]) -> Option<(Scalar, NonZeroScalar, GroupPoint)> {
    let plain: [u8; SCALAR_BYTES] = sym_decrypt(d, &req.s1, CTX_S1).try_into().expect("length preserving");
    let beta: Scalar = Option::from(Scalar::from_be_bytes(&plain))?;
    let gamma = h2(&req.pid.0, &beta, &req.a, &req.s1, d, rsu_pk, req.t1.0);
    let ch = msm2(&req.m, &gamma.get(), &req.a).normalize();
    Some((beta, gamma, ch))
}

/// Full recomputation under the group keys of one epoch.
pub fn open_request(keys: &GroupKeys, req: &AuthRequest, rsu_pk: &[u8]) -> Option<OpenedRequest> {
    let pd = keys.open_pid(&req.pid);
    let d = keys.derive_d(&pd, &req.pid);
    let (beta, gamma, ch) = open_with_key(req, &d, rsu_pk)?;
    Some(OpenedRequest { pd, d, beta, gamma, ch })
}
