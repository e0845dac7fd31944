//! Error type shared by all subsystems.

use thiserror::Error;

/// Crate-wide error. The three variants map onto the runner's exit codes:
/// validation failures exit 2, numerical refusals exit 3, retry exhaustion
/// exits 4.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on the inputs does not hold.
    #[error("validation: {0}")]
    Validation(String),

    /// The computation was refused on numerical grounds (e.g. a grid plan
    /// that violates the Nyquist rule, or a quadrature that would need more
    /// points than the configured cap). Proceeding would silently produce
    /// garbage, so we stop instead.
    #[error("numerical refusal: {0}")]
    Refusal(String),

    /// A bounded retry loop (randomized selection) ran out of attempts.
    #[error("retry exhaustion: {0}")]
    RetryExhaustion(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn refusal(msg: impl Into<String>) -> Self {
        Error::Refusal(msg.into())
    }
}
