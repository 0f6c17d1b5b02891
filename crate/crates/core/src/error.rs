use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An enumeration would exceed its configured cap.
    #[error("capacity exceeded while {what}: {count} > cap {cap}")]
    Capacity { what: String, count: u64, cap: u64 },

    /// Adaptive refinement needed a cell finer than the allowed depth.
    #[error("resolution exhausted: cell {index} at depth {depth} still has energy {energy} > {epsilon}")]
    ResolutionExhausted {
        depth: u32,
        index: u64,
        energy: f64,
        epsilon: f64,
    },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
