use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("x has {x} observations but y has {y}")]
    LengthMismatch { x: usize, y: usize },

    #[error("a series needs at least 2 observations, got {0}")]
    TooFewObservations(usize),

    #[error("non-finite value at observation {0}")]
    NonFinite(usize),

    #[error("timestamps have {got} labels for {expected} observations")]
    TimestampLength { expected: usize, got: usize },

    #[error("segment [{a}, {b}] is outside 1..={len}")]
    Range { a: usize, b: usize, len: usize },

    #[error("zero variance in segment [{a}, {b}]")]
    Degenerate { a: usize, b: usize },

    #[error("nonpositive long-run variance {value:e} in segment [{a}, {b}]")]
    NonPositiveVariance { a: usize, b: usize, value: f64 },

    #[error("segment [{a}, {b}] has fewer than {min} observations")]
    TooShort { a: usize, b: usize, min: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    /// True for errors that mean "this segment cannot be tested", as opposed
    /// to malformed input.
    pub fn is_untestable(&self) -> bool {
        matches!(self, Error::Degenerate { .. } | Error::NonPositiveVariance { .. } | Error::TooShort { .. })
    }
}
