use thiserror::Error;

/// Errors shared by every module in the crate.
///
/// Numeric payloads are widened to `f64` so the error type stays non-generic.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter {value} outside domain [{lo}, {hi}]")]
    ParameterOutOfDomain { value: f64, lo: f64, hi: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "truncation cap of {cap} levels exceeded: tail weight {tail_weight:e} still at or above tolerance {tolerance:e}"
    )]
    TruncationCapExceeded {
        cap: usize,
        tail_weight: f64,
        tolerance: f64,
    },

    #[error("incompatible level structure: {0}")]
    LevelStructureMismatch(String),

    #[error("invalid protocol: {0}")]
    InvalidProtocol(String),

    #[error("numerical failure in {context}: error estimate {estimate:e} exceeds tolerance {tolerance:e}")]
    NumericsFailed {
        context: &'static str,
        estimate: f64,
        tolerance: f64,
    },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("cannot project onto level {level}: outcome probability is zero")]
    ZeroProbabilityOutcome { level: usize },

    #[error("degenerate model: {0}")]
    DegenerateModel(String),
}

pub type Result<T> = std::result::Result<T, Error>;
