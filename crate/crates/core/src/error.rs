use thiserror::Error;

/// Failure modes shared by every evaluator in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumError {
    #[error("pole: {0}")]
    Pole(String),
    #[error("resonant parameters: {0}")]
    Resonance(String),
    #[error("argument on a branch cut: {0}")]
    Cut(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("integrand does not decay along the contour: {0}")]
    NonDecay(String),
    #[error("no convergence: {0}")]
    Convergence(String),
    #[error("exponent constraint violated: {0}")]
    Constraint(String),
    #[error("singular system: {0}")]
    Singular(String),
    #[error("precision alarm: {0}")]
    Precision(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, NumError>;
