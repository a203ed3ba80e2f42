use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("operator is not Hermitian (defect {defect:.3e}, allowed {allowed:.3e})")]
    Hermiticity { defect: f64, allowed: f64 },

    #[error("normalization error: {0}")]
    Normalization(String),

    #[error("unsupported dimension: {0}")]
    UnsupportedDimension(String),

    #[error("degenerate parameters: {0}")]
    DegenerateParameters(String),

    #[error("no closed-form threshold available: {0}")]
    AnalyticUnavailable(String),

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("no decomposition window: {0}")]
    EmptyWindow(String),

    #[error("decomposition payload failed verification: {0}")]
    PsdViolation(String),

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
}

pub type Result<T> = std::result::Result<T, Error>;
