use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of a function (NaN, infinity, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// An operation was called outside the physical regime it assumes.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Parameters, grids or files that cannot describe a valid computation.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("numerical failure in {what}: achieved error {achieved:.3e}")]
    Numerical { what: String, achieved: f64 },

    #[error("singular integral: {0}")]
    Singular(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn numerical(what: impl Into<String>, achieved: f64) -> Self {
        Error::Numerical {
            what: what.into(),
            achieved,
        }
    }

    /// True for failures caused by the inputs rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Domain(_) | Error::Precondition(_) | Error::Config(_) | Error::Parse(_)
        )
    }
}
