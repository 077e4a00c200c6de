use thiserror::Error;

/// Library-wide error type.
///
/// The variants mirror the failure modes that matter operationally:
/// combinatorial breakdowns (a periodic orbit where an irrational one was
/// expected, mismatched partition structure) are recoverable facts about the
/// input, while precision exhaustion means the requested depth cannot be
/// certified with the active backend.
#[derive(Debug, Error)]
pub enum Error {
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),

    /// A periodic orbit was detected: the critical orbit closed up to within
    /// the locking tolerance after `period` iterates.
    #[error("rational lock: orbit closes up after {period} iterates")]
    RationalLock { period: u64 },

    #[error("domain violation: {0}")]
    Domain(String),

    #[error("combinatorial mismatch: {0}")]
    Combinatorics(String),

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// CLI exit-code contract: 0 success, 1 internal error,
    /// 2 combinatorial/rational-lock, 3 precision-exhausted.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::RationalLock { .. } | Error::Combinatorics(_) => 2,
            Error::PrecisionExhausted(_) => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
