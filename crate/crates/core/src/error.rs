use thiserror::Error;

/// Errors raised by the simulation engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("blow-up at t = {t} ({detail})")]
    BlowUp { t: f64, detail: String },

    #[error(
        "fixed-point map is not contracting on a horizon of {horizon} \
         (ratios {ratios:?}); split the interval into shorter pieces"
    )]
    HorizonTooLong { horizon: f64, ratios: Vec<f64> },

    #[error("problem too large for the brute-force solver: {0}")]
    TooLarge(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
