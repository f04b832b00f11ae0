use thiserror::Error;

use crate::diagnostic::{render_all, Diagnostic};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FtaError {
    #[error("invalid fault tree:\n{}", render_all(.0))]
    InvalidTree(Vec<Diagnostic>),
    #[error("transfer to `{0}` is not resolved")]
    UnresolvedTransfer(String),
    #[error("no truth value assigned to `{0}`")]
    MissingAssignment(String),
    #[error("no probability given for `{0}`")]
    MissingProbability(String),
    #[error("probability {value} for `{id}` is outside [0, 1]")]
    ProbabilityOutOfRange { id: String, value: f64 },
    #[error("transfer target `{0}` names no tree in the collection")]
    UnknownTransferTarget(String),
    #[error("transfer cycle: {}", .0.join(" -> "))]
    TransferCycle(Vec<String>),
    #[error("more than one tree is titled `{0}`")]
    DuplicateTreeTitle(String),
    #[error("layout does not match tree: {0}")]
    LayoutMismatch(String),
    #[error("no @startuml ... @enduml block found")]
    NoUmlBlock,
}

pub type Result<T, E = FtaError> = std::result::Result<T, E>;
