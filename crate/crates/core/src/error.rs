use thiserror::Error;

/// Errors raised by constructors and validated operations in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (asymmetry {asymmetry:e} exceeds 1e-10)")]
    NotHermitian { asymmetry: f64 },

    #[error("matrix is not in SL(2,C): |det - 1| = {defect:e}")]
    NotUnimodular { defect: f64 },

    #[error("singular matrix cannot be normalized to unit determinant")]
    Singular,

    #[error("complex coordinates violate a.a = 1 (defect {defect:e})")]
    CoordinateNormalization { defect: f64 },

    #[error("boost vector has norm {norm}, must be strictly below 1")]
    OutsideUnitBall { norm: f64 },

    #[error("boost velocity {alpha} outside the open interval (0, 1)")]
    InvalidAlpha { alpha: f64 },

    #[error("vector cannot be normalized (norm {norm})")]
    ZeroVector { norm: f64 },

    #[error("generator system must contain at least one map")]
    EmptySystem,

    #[error("point set must be non-empty")]
    EmptyPointSet,

    #[error("point sets use different metrics")]
    MetricMismatch,

    #[error("tangent vector has zero length")]
    ZeroTangent,

    #[error("histogram grids are not compatible for merging")]
    IncompatibleGrids,

    #[error("log tone mapping requires counters initialised to 1")]
    LogToneNeedsUnitInitial,

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("preset `custom` has no built-in generators")]
    CustomPreset,

    #[error("n_points must be at least 1")]
    NoPoints,

    #[error("map probabilities must be positive and sum to 1 (sum {sum})")]
    InvalidProbabilities { sum: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
