use thiserror::Error;

/// Every failure the library reports. Variants carry enough context to be
/// written into a run manifest as a structured entry.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("interval ({center} - {half_width}, {center} + {half_width}) is not inside (0, 1)")]
    InvalidInterval { center: f64, half_width: f64 },

    #[error("precision exhausted: {context}")]
    PrecisionExhausted { context: String },

    #[error("negative time {0}")]
    NegativeTime(f64),

    #[error("control horizon {control} does not match requested horizon {requested}")]
    HorizonMismatch { control: f64, requested: f64 },

    #[error("series diverges: sin(n pi x0) = 0 at n = {n}")]
    Resonance { n: u64 },

    #[error("mode {mode} has zero overlap with the control profile but a nonzero coefficient")]
    NotControllableByProfile { mode: usize },

    #[error("mode {mode} vanishes at x0 but has a nonzero coefficient")]
    NotPointwiseControllable { mode: usize },

    #[error("Gramian is singular at {bits} bits")]
    NotControllableInTruncation { bits: u32 },

    #[error("no qualifying witness index up to n = {n_max} (resonant indices rejected: {rejected:?})")]
    NotApplicable { n_max: u64, rejected: Vec<u64> },

    #[error("construction failed at level {level} after {draws} draws (excluded fraction estimate {excluded_fraction})")]
    ConstructionFailed { level: usize, draws: usize, excluded_fraction: f64 },

    #[error("every index in the grid is resonant")]
    EmptyGrid,

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn precision(context: impl Into<String>) -> Self {
        Error::PrecisionExhausted { context: context.into() }
    }

    /// Short machine-friendly tag, used in CSV and manifest entries.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInterval { .. } => "invalid-interval",
            Error::PrecisionExhausted { .. } => "precision-exhausted",
            Error::NegativeTime(_) => "negative-time",
            Error::HorizonMismatch { .. } => "horizon-mismatch",
            Error::Resonance { .. } => "divergent-by-resonance",
            Error::NotControllableByProfile { .. } => "not-controllable-by-profile",
            Error::NotPointwiseControllable { .. } => "not-pointwise-controllable",
            Error::NotControllableInTruncation { .. } => "not-controllable-in-truncation",
            Error::NotApplicable { .. } => "not-applicable",
            Error::ConstructionFailed { .. } => "construction-failed",
            Error::EmptyGrid => "empty-grid",
            Error::InvalidInput(_) => "invalid-input",
        }
    }
}
