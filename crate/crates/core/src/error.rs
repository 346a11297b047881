use thiserror::Error;

/// Errors raised by domain-level validation across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid spreading factor {0}, expected 7..=12")]
    InvalidSpreadingFactor(u32),

    #[error("symbol {value} out of range for M = {m}")]
    InvalidSymbol { value: usize, m: usize },

    #[error("frame length {got} does not match M = {expected}")]
    LengthMismatch { got: usize, expected: usize },

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("{0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;
