use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("insufficient precision: {needed} digits needed, {available} tracked")]
    InsufficientPrecision { needed: u32, available: u32 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown variable `{0}`")]
    Arity(String),
    #[error("coset index {index} is out of range for power {power} ({count} cosets)")]
    InvalidCoset { index: usize, power: u32, count: usize },
    #[error("unsupported splitting: {0}")]
    UnsupportedSplitting(String),
    #[error("root extraction failed: {0}")]
    RootExtraction(String),
    #[error("cell is empty")]
    EmptyCell,
    #[error("type-0 cell has no valuation image")]
    TypeZeroCell,
    #[error("set is unbounded below")]
    Unbounded,
    #[error("set is empty")]
    Empty,
    #[error("function vanishes at {0}")]
    VanishingFunction(String),
    #[error("domain is not closed and bounded: {0}")]
    UnboundedDomain(String),
    #[error("sample of {size} points exceeds the cap of {cap}")]
    SizeCap { size: u128, cap: u128 },
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    /// True for the error kinds the command line reports as "unsupported
    /// input" rather than as a failed verification.
    pub fn is_unsupported(&self) -> bool {
        matches!(
            self,
            Error::UnsupportedSplitting(_)
                | Error::InsufficientPrecision { .. }
                | Error::RootExtraction(_)
        )
    }
}
