use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// The (base, digit, count) triple is outside the supported domain.
    #[error("invalid digit spec: {0}")]
    InvalidSpec(String),

    /// An argument is outside an operation's domain (e.g. digamma shift
    /// outside [0,1), zeta below 2).
    #[error("domain error: {0}")]
    Domain(String),

    /// The request exceeds configured table/series size limits.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// An enumeration would exceed the configured work budget.
    #[error("budget exceeded: {0}")]
    Budget(String),
}

pub type Result<T> = std::result::Result<T, Error>;
