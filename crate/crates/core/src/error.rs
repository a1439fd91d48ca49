//! Crate-wide error type.

use thiserror::Error;

/// Errors shared by all modules.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    /// A count or sequence length is outside the supported range.
    #[error("invalid size: {0}")]
    InvalidSize(String),

    /// A rank, index, or sequence fails a structural precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Threshold tables built for one horizon were applied to another.
    #[error("threshold tables built for n={tables} but stream has length {stream}")]
    TablesMismatch { tables: usize, stream: usize },

    /// A strategy name not in the registry.
    #[error("unknown strategy `{0}` (expected one of: op, single-optimal, half-split, offline)")]
    UnknownStrategy(String),

    /// A move function emitted a move that is illegal in its current state.
    #[error("strategy protocol violation at step {step}: {what}")]
    ProtocolViolation { step: usize, what: String },

    /// An exhaustive computation was requested beyond its feasibility bound.
    #[error("n={n} exceeds the enumeration bound of {max}")]
    ResourceBound { n: usize, max: usize },

    /// Competitive ratio requested where the on-line expectation is zero.
    #[error("competitive ratio undefined for n={0}: on-line expected profit is zero")]
    UndefinedRatio(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
