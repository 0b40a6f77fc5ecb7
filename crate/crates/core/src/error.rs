use thiserror::Error;

/// Errors reported by the library.
#[derive(Error, Debug)]
pub enum Error {
    /// A mode index or dimension exceeds what the implementation evaluates.
    #[error("capability exceeded: {0}")]
    Capability(String),

    /// A grid or truncation cannot represent the requested object at the
    /// requested accuracy.
    #[error("resolution error: {0}")]
    Resolution(String),

    /// Mismatched array shapes or incompatible grids.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Invalid parameter domain (exponents, cutoffs, empty data).
    #[error("domain error: {0}")]
    Domain(String),

    /// Incompatible estimator identities in a merge, or a violated call contract.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A ratio whose denominator vanishes (zero field, degenerate projection).
    #[error("degenerate quantity: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
