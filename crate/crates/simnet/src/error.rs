use thiserror::Error;

use crate::engine::Transcript;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("scenario line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("topology is malformed: {0}")]
    Topology(String),
    #[error("adversary action {index} targets {link}, which is secure or missing")]
    SecureLinkTargeted { index: usize, link: String },
    #[error("step references unknown node {0}")]
    UnknownNode(String),
    #[error("no events remain but {} expectation(s) are unmet: {}", unmet.len(), unmet.join("; "))]
    DeadlockDetected { unmet: Vec<String>, transcript: Box<Transcript> },
}
