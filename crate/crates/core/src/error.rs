use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("structure invalid: {0}")]
    InvalidStructure(String),
    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),
    #[error("carrier cap exceeded ({got} > {cap})")]
    CarrierCap { got: usize, cap: usize },
    #[error("canonicalization cap exceeded ({got} > {cap})")]
    CanonicalCap { got: usize, cap: usize },
    #[error("enumeration cap exceeded ({got} > {cap})")]
    EnumerationCap { got: u64, cap: u64 },
    #[error("extension slot cap exceeded ({got} > {cap})")]
    ExtensionSlotCap { got: usize, cap: usize },
    #[error("vertex {vertex} out of range for carrier of size {size}")]
    VertexOutOfRange { vertex: usize, size: usize },
    #[error("morphism is not a {expected}: {reason}")]
    NotAMorphism { expected: String, reason: String },
    #[error("inconsistent seed: {0}")]
    InconsistentSeed(String),
    #[error("domain/codomain mismatch: {0}")]
    CompositionMismatch(String),
    #[error("amalgamation failed: {0}")]
    AmalgamationFailed(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("arity mismatch: {0}")]
    ArityMismatch(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
