use thiserror::Error;

/// Errors produced by construction, validation, and solving.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    #[error("not monotone: {0}")]
    NonMonotone(String),

    #[error("out of domain: {value} not in [{lo}, {hi}]")]
    OutOfDomain { value: f64, lo: f64, hi: f64 },

    #[error("wrong orientation: expected {0}")]
    WrongOrientation(&'static str),

    #[error("set is not balanced: {0}")]
    UnbalancedSet(String),

    #[error("missing density")]
    MissingDensity,

    #[error("density is not unimodal: {0}")]
    NotUnimodal(String),

    #[error("bracket failure: {0}")]
    BracketFailure(String),

    #[error("too many cells: {0} exceeds the enumeration cap of 22")]
    TooManyCells(usize),

    #[error("unsupported shape: {0}")]
    UnsupportedShape(String),

    #[error("principal payoff does not diverge: {0}")]
    UnboundedV(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
