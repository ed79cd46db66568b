use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    /// A lemma or operation precondition does not hold on the given instance.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// The requested power is irrational and the operation needs it exactly.
    #[error("value {value} raised to {exponent} is not rational")]
    NotExact { value: String, exponent: String },

    /// Certified enclosures overlap; the comparison cannot be decided at the working precision.
    #[error("comparison undecidable at working precision: {0}")]
    Undecidable(String),

    #[error("carrier mismatch: {0}")]
    Carrier(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("oracle failure: {0}")]
    Oracle(String),
}

impl Error {
    pub fn is_precondition(&self) -> bool {
        matches!(self, Error::Precondition(_))
    }
}
