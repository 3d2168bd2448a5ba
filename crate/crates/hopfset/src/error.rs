//! Error type shared by every module of the crate.

use thiserror::Error;

/// Everything that can go wrong while building or combining objects.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HopfError {
    /// Malformed textual or JSON input.
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    /// Structurally invalid input (e.g. a non-laminar forest).
    #[error("invalid input: {0}")]
    Invalid(String),
    /// A nested set of the wrong nesting degree was supplied.
    #[error("wrong nesting degree: {0}")]
    WrongDegree(String),
    /// A sequence of blocks in which one block is absorbed by the others.
    #[error("degenerate sequence: {0}")]
    Degenerate(String),
    /// A required inclusion between sets or families does not hold.
    #[error("not included: {0}")]
    NotIncluded(String),
    /// Two blocks that must be disjoint overlap.
    #[error("overlapping blocks: {0}")]
    Overlap(String),
    /// A block of forbidden size (e.g. a singleton collapse).
    #[error("bad block size: {0}")]
    BadSize(String),
    /// A configured size limit was exceeded.
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),
    /// A partial product was applied outside its domain.
    #[error("undefined product: {0}")]
    UndefinedProduct(String),
}

impl HopfError {
    /// Shorthand for a parse error.
    pub fn parse(pos: usize, msg: impl Into<String>) -> Self {
        HopfError::Parse { pos, msg: msg.into() }
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, HopfError>;
