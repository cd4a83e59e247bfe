//! Deterministic network simulation and benchmark drivers for the handover protocol.

pub mod adversary;
pub mod bench;
pub mod canned;
pub mod engine;
pub mod error;
pub mod scenario;
pub mod topology;

pub use adversary::{Action, AdversaryScript, MsgKind, Nth, Payload};
pub use engine::{forge_request, run_scenario, Entry, Transcript};
pub use error::SimError;
pub use scenario::{Expectation, Scenario, Step, StepAction, DEFAULT_SEED};
pub use topology::{Hop, LinkSpec, NodeKind, NodeSpec, Topology};
