use thiserror::Error;

/// Errors raised by tensor construction, graph operations and the optimizer.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum TensorError {
    #[error("{op}: shape mismatch between {lhs:?} and {rhs:?}")]
    ShapeMismatch {
        op: &'static str,
        lhs: Vec<usize>,
        rhs: Vec<usize>,
    },

    #[error("{op}: expected {expected}, got shape {got:?}")]
    RankMismatch {
        op: &'static str,
        expected: &'static str,
        got: Vec<usize>,
    },

    #[error("{op}: domain error: {detail}")]
    Domain { op: &'static str, detail: String },

    #[error("{op}: contract violation: {detail}")]
    Contract { op: &'static str, detail: String },

    #[error("data length {len} does not match shape {shape:?}")]
    LengthMismatch { len: usize, shape: Vec<usize> },

    #[error("non-finite value in {what}")]
    NonFinite { what: String },
}
