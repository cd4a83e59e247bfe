//! Anonymous cross-domain handover authentication for vehicular networks.
//!
//! The crate is layered bottom-up: [`crypto`] holds the stateless primitives,
//! [`wire`] the fixed-size message encodings, [`ledger`] the simulated
//! append-only chain, and [`actors`] the VN/RSU/RSM/LEA state machines and
//! the public framing audit.

pub mod actors;
pub mod crypto;
pub mod ledger;
pub mod wire;

pub use crypto::chameleon::{ch_collide, ch_commit, ch_keygen, ch_keygen_with, ChameleonHashKey, ChameleonTrapdoor};
pub use crypto::field::{Fp, Modulus};
pub use crypto::group::{msm2, scalar_mul, GroupPoint, NonZeroScalar, PointError};
pub use crypto::hash::{Digest, SymKey, HASH_LEN};

/// Base-field element of the 224-bit curve.
pub type FieldElement = crypto::group::FieldElement;
/// Integer modulo the prime group order `q`.
pub type Scalar = crypto::group::Scalar;
