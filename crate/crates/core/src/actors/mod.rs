//! Protocol state machines. Each actor owns its state and is driven by the
//! caller (normally the network simulator) one message at a time.

pub mod audit;
pub mod error;
pub mod events;
pub mod lea;
pub mod open;
pub mod params;
pub mod rotation;
pub mod rsm;
pub mod rsu;
pub mod vehicle;

pub use audit::{audit_frame_claim, AuditVerdict, FrameClaim};
pub use error::{AuditError, RegistrationError, RsuError, TraceError, VnError};
pub use events::{Event, EventLog};
pub use lea::{lea_init, Evidence, Lea, LeaReceipt, TraceResult};
pub use params::{Directory, GroupSecret, ProtocolConfig, SystemParams};
pub use rotation::{rotate_group_key, RotationOutcome};
pub use rsm::{rsm_init, Rsm};
pub use rsu::{rsu_init, Rsu, SessionId, VerifiedRequest};
pub use vehicle::{ChameleonCredential, PendingRegistration, Vehicle, VnOutcome, VnSession};
