use core::fmt;

/// Errors shared by all modules in this crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A schedule parameter fell outside its valid range.
    InvalidSchedule(&'static str),
    /// Two vectors that must share a dimension do not.
    DimensionMismatch { expected: usize, got: usize },
    /// A timestep outside `[1, T]` (or `[0, T-1]` for marginal targets).
    TimestepOutOfRange { t: usize, max: usize },
    /// A density was requested from a zero-variance (Dirac) Gaussian.
    DegenerateVariance,
    /// Fewer samples than the estimator requires.
    InsufficientSamples { needed: usize, got: usize },
    /// A per-timestep list has the wrong length.
    LengthMismatch { expected: usize, got: usize },
    /// The loss weights are identically zero; callers should fall back to
    /// the base distribution.
    DegenerateWeights,
    /// Importance distribution assigns zero mass where the integrand is
    /// nonzero.
    SupportViolation { index: usize },
    /// Training produced a non-finite loss.
    NonFiniteLoss { step: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidSchedule(msg) => write!(f, "invalid schedule: {msg}"),
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::TimestepOutOfRange { t, max } => {
                write!(f, "timestep {t} out of range (max {max})")
            }
            Error::DegenerateVariance => write!(f, "degenerate (zero) variance"),
            Error::InsufficientSamples { needed, got } => {
                write!(f, "need at least {needed} samples, got {got}")
            }
            Error::LengthMismatch { expected, got } => {
                write!(f, "length mismatch: expected {expected}, got {got}")
            }
            Error::DegenerateWeights => {
                write!(f, "loss identically zero; fall back to base distribution")
            }
            Error::SupportViolation { index } => {
                write!(f, "proposal has zero mass at index {index} with nonzero integrand")
            }
            Error::NonFiniteLoss { step } => write!(f, "non-finite loss at step {step}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
