//! Error type shared across the crate.

/// Errors raised by constructors and operations with restricted domains.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A logarithm or rate was requested at a non-positive argument.
    #[error("argument must be positive, got {0}")]
    NonPositive(f64),
    /// A confidence budget outside the open unit interval.
    #[error("delta must lie in (0, 1), got {0}")]
    DeltaOutOfRange(f64),
    /// A sample-size parameter that must be at least one.
    #[error("sample size must be >= 1, got {0}")]
    SampleSizeZero(usize),
    /// Points of mismatched dimension were compared.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    /// A point does not belong to the metric space it was used with.
    #[error("point does not belong to the space: {0}")]
    PointNotInSpace(String),
    /// A distance table failed the metric axioms.
    #[error("invalid distance table: {0}")]
    InvalidDistanceTable(String),
    /// A labelled class sample has an odd length or is empty.
    #[error("class {class} sample must have positive even length, got {len}")]
    BadSampleLength { class: u8, len: usize },
    /// The first half of a class sample is empty where the estimator needs it.
    #[error("class {0} first-half sample is empty")]
    EmptyFirstHalf(u8),
    /// A windowed estimate was requested beyond the recorded history.
    #[error("insufficient history: need {needed} values, trace holds {have}")]
    InsufficientHistory { needed: usize, have: usize },
    /// A prediction time outside the valid range.
    #[error("time {t} out of range: {reason}")]
    TimeOutOfRange { t: usize, reason: String },
    /// A probability vector that does not describe a distribution.
    #[error("invalid pmf: {0}")]
    InvalidPmf(String),
    /// A scenario description that fails its declared certificate.
    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),
    /// A generative scenario that is internally inconsistent.
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    /// Interval endpoints out of order or non-finite.
    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },
    /// Reporting overlays are undefined when the class conditionals coincide.
    #[error("total variation is zero; rate overlays are undefined")]
    ZeroTotalVariation,
}

pub type Result<T> = std::result::Result<T, Error>;
