use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("parameter out of range: {0}")]
    ParameterRange(String),
    #[error("kernel quadrature did not converge: {0}")]
    OracleDivergence(String),
    #[error("divergent Mellin weight: {0}")]
    DivergentWeight(String),
    #[error("independent evaluation routes disagree: {0}")]
    RouteDisagreement(String),
    #[error("epsilon extrapolation did not converge: {0}")]
    Extrapolation(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("blow-up time reached at t = {0}")]
    BlowupReached(f64),
    #[error("mean of G is {0:e}, expected zero")]
    NonzeroMean(f64),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

pub type Result<T> = std::result::Result<T, LabError>;
