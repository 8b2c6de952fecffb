use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension N must be at least 1 (got {0})")]
    NonPositiveDimension(i64),

    #[error("frequency multiplier n_{index} = {value} is not a positive integer")]
    NonIntegerMultiplier { index: usize, value: f64 },

    #[error("base frequency omega must be positive and finite (got {0})")]
    NonPositiveOmega(f64),

    #[error("{what}: expected length {expected}, got {actual}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("coordinate {index} = {value:e} inside the exclusion radius at t = {t}")]
    SingularState { index: usize, value: f64, t: f64 },

    #[error("k_{index} = {value} is negative; the lift needs k >= 0")]
    NegativeK { index: usize, value: f64 },

    #[error("plane {plane} radius {radius:e} is on the polar axis (t = {t})")]
    AxisSingularity { plane: usize, radius: f64, t: f64 },

    #[error("trajectory sample {index} (t = {t}) left the polar chart")]
    TrajectoryAxisSingularity { index: usize, t: f64 },

    #[error("result magnitude 2^{log2_magnitude:.1} overflows f64")]
    Overflow { log2_magnitude: f64 },

    #[error("integral {0} is not defined for these parameters")]
    UnknownIntegral(String),

    #[error("integral {id} is not defined on the {kind} system")]
    WrongSystemKind { id: String, kind: &'static str },

    #[error("invalid integral name {0:?}")]
    ParseIntegral(String),

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// True for failures caused by the dynamics reaching a singular region.
    pub fn is_singular(&self) -> bool {
        matches!(
            self,
            Error::SingularState { .. }
                | Error::AxisSingularity { .. }
                | Error::TrajectoryAxisSingularity { .. }
                | Error::StepSizeUnderflow { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
