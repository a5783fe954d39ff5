use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Operands live over different algebras or in modules of different length.
    #[error("structural mismatch: {0}")]
    Structural(String),

    /// The operation is undefined for this input (non-positive square root, zero witness, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A value failed validation on construction or deserialization.
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("inconsistent generator: {0}")]
    InconsistentGenerator(String),

    #[error("config hash mismatch: report has {report}, config hashes to {config}")]
    HashMismatch { report: String, config: String },
}

impl Error {
    pub(crate) fn structural(msg: impl Into<String>) -> Self {
        Error::Structural(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
