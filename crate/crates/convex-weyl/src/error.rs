//! Crate-wide error type.

/// Errors surfaced by library operations.
///
/// Every refusal carries enough context to name the violated condition;
/// none of the variants are used for "expected" mathematical outcomes
/// (e.g. a root sum falling outside the system returns `None`, not `Err`).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A Cartan datum failed validation (shape, signs, symmetrizability,
    /// positive definiteness, or the rank cap).
    #[error("invalid Cartan datum: {0}")]
    InvalidCartan(String),

    /// A root (given by coefficients) does not belong to the system at hand.
    #[error("root {0:?} does not belong to this root system")]
    ForeignRoot(Vec<i64>),

    /// Elements from different root systems were combined.
    #[error("mismatched root systems: {0}")]
    MixedSystems(String),

    /// An enumeration cap or budget would be exceeded.
    #[error("enumeration budget exceeded: {0}")]
    Budget(String),

    /// An operation that requires an elliptic element received a
    /// non-elliptic one.
    #[error("element is not elliptic: {0}")]
    NotElliptic(String),

    /// A stated precondition failed (reported, never silently skipped).
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// A field specification is unusable.
    #[error("invalid field specification: {0}")]
    InvalidField(String),

    /// A scan/verify configuration or instance file is invalid.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// An internal invariant failed; indicates a defect, surfaced loudly.
    #[error("internal consistency failure: {0}")]
    Internal(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
