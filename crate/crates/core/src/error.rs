use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A scenario field violates a constraint.
    #[error("invalid {field}: {reason}")]
    Validation { field: String, reason: String },

    /// Inconsistent configuration, e.g. a wavelength without a transmit power.
    #[error("configuration error: {0}")]
    Config(String),

    /// An assignment breaks one of the WDMA slot constraints.
    #[error("invalid assignment: {0}")]
    Assignment(String),

    #[error(
        "action space has {size} actions, exceeding the enumeration budget of {budget}; \
         reduce the number of users or slots, or raise the budget"
    )]
    Budget { size: u64, budget: u64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
