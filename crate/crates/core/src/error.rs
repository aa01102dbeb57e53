use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Malformed input data (too few nodes, non-finite samples, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// Right-hand side evaluated at the coordinate singularity t = 0.
    #[error("right-hand side is singular at t = 0; start from the series expansion")]
    Singularity,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("integration failed at t = {t}: {reason}")]
    IntegrationFailed { t: f64, reason: String },
    #[error("bracket error: {0}")]
    Bracket(String),
    #[error("outcome structure error: {0}")]
    Structure(String),
    #[error("no classification flip found: {0}")]
    NoBracket(String),
    #[error("fit window too short: {width} < {required}")]
    Window { width: f64, required: f64 },
}
