use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at position {pos}: {message}")]
    Syntax { pos: usize, message: String },

    #[error("unknown identifier `{name}` at position {pos}")]
    UnknownIdentifier { name: String, pos: usize },

    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    #[error("not differentiable: {0}")]
    NonDifferentiable(String),

    #[error("precision of {digits} digits is invalid: {reason}")]
    Precision { digits: u32, reason: String },

    #[error("finite differences did not converge: error estimate {estimate} exceeds {tolerance}")]
    NoConvergence { estimate: String, tolerance: String },

    #[error("jet order {have} is insufficient, need at least {need}")]
    InsufficientOrder { have: usize, need: usize },

    #[error("invalid case parameters: {0}")]
    InvalidCase(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no positive radius found: {0}")]
    NoRadius(String),

    #[error("denominator vanishes on the region near x = {at}")]
    DenominatorVanishes { at: String },

    #[error("invalid rational function: {0}")]
    InvalidRational(String),

    #[error("witness search budget exhausted: {0}")]
    BudgetExhausted(String),

    #[error("simplex failure: {0}")]
    Simplex(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
