use thiserror::Error;

/// Errors raised by state construction, channels and the protocol layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum QssError {
    #[error("mode count must be at least one")]
    NoModes,
    #[error("mode index {index} out of range for a {n_modes}-mode state")]
    InvalidMode { index: usize, n_modes: usize },
    #[error("modes must be distinct, got {0} twice")]
    RepeatedMode(usize),
    #[error("{name} = {value} is outside [{min}, {max}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("{name} must be non-negative, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("covariance matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("state violates the uncertainty principle (smallest symplectic eigenvalue {0:e})")]
    Inadmissible(f64),
    #[error("covariance matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("expected a {expected}-mode state, got {got} modes")]
    ModeCount { expected: usize, got: usize },
    #[error("fidelity {0} is outside [0, 1] beyond rounding slack")]
    FidelityRange(f64),
    #[error("output displacement is zero; effective noise is undefined")]
    ZeroDisplacement,
    #[error("ensemble variance {ensemble} cannot cover state variance {state}")]
    BudgetExhausted { ensemble: f64, state: f64 },
    #[error("sample count must be positive")]
    NoSamples,
    #[error("empty mode selection")]
    EmptySelection,
}

pub type Result<T> = std::result::Result<T, QssError>;

pub(crate) fn check_range(name: &'static str, value: f64, min: f64, max: f64) -> Result<()> {
    if value.is_nan() || value < min || value > max {
        return Err(QssError::OutOfRange { name, value, min, max });
    }
    Ok(())
}

pub(crate) fn check_non_negative(name: &'static str, value: f64) -> Result<()> {
    if value.is_nan() || value < 0.0 {
        return Err(QssError::Negative { name, value });
    }
    Ok(())
}
