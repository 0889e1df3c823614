//! Error type shared by all modules.

use core::fmt;

/// Usage errors surfaced by the auditing primitives.
///
/// Every variant is a caller mistake (bad parameters, inconsistent inputs,
/// stepping a frozen test); none indicates an internal failure.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two points (or a point and a kernel history) disagree on dimension.
    DimensionMismatch { expected: usize, found: usize },
    /// A coordinate, gradient, or parameter was NaN or infinite.
    NonFinite(&'static str),
    /// Kernel bandwidth must be strictly positive.
    InvalidBandwidth(f64),
    /// Too few pilot points for the median heuristic.
    PilotTooSmall { needed: usize, found: usize },
    /// ε must be ≥ 0 and δ in [0, 1).
    InvalidPrivacyParams { epsilon: f64, delta: f64 },
    /// Discrete distributions with mismatched support or mass not summing to 1.
    InvalidDistribution(&'static str),
    /// The ONS interval must satisfy a < b with 0 ∈ [a, b].
    InvalidInterval { lo: f64, hi: f64 },
    /// A scalar parameter outside its documented range.
    InvalidParameter { name: &'static str, value: f64 },
    /// An input collection that must be nonempty was empty.
    EmptyInput(&'static str),
    /// A sequential test was stepped after it already rejected.
    SteppedAfterReject,
    /// A step method was called on a state built for the other strategy.
    StrategyMismatch,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::NonFinite(what) => write!(f, "non-finite {what}"),
            Error::InvalidBandwidth(b) => write!(f, "invalid bandwidth {b} (must be > 0)"),
            Error::PilotTooSmall { needed, found } => {
                write!(
                    f,
                    "pilot too small: need at least {needed} points, found {found}"
                )
            }
            Error::InvalidPrivacyParams { epsilon, delta } => {
                write!(
                    f,
                    "invalid privacy parameters: epsilon={epsilon}, delta={delta}"
                )
            }
            Error::InvalidDistribution(what) => write!(f, "invalid distribution: {what}"),
            Error::InvalidInterval { lo, hi } => {
                write!(
                    f,
                    "invalid interval [{lo}, {hi}]: need lo < hi and 0 in [lo, hi]"
                )
            }
            Error::InvalidParameter { name, value } => {
                write!(f, "invalid parameter {name}={value}")
            }
            Error::EmptyInput(what) => write!(f, "empty input: {what}"),
            Error::SteppedAfterReject => write!(f, "test already rejected; state is frozen"),
            Error::StrategyMismatch => write!(f, "step method does not match configured strategy"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
