use thiserror::Error;

/// Errors raised by the quantum-operation toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QopError {
    #[error("dimension overflow: {0} exceeds the configured maximum {1}")]
    DimensionOverflow(usize, usize),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("bad subsystem index {0} (have {1} subsystems)")]
    BadSubsystemIndex(usize, usize),

    #[error("not hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPositive(f64),

    #[error("trace is not 1 (got {0})")]
    BadTrace(f64),

    #[error("state vector is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("non-finite matrix entry")]
    NonFinite,

    #[error("not completely positive (min Choi eigenvalue {0:.3e})")]
    NotCompletelyPositive(f64),

    #[error("not trace preserving (deviation {0:.3e})")]
    NotTracePreserving(f64),

    #[error("not a distribution: {0}")]
    NotADistribution(String),

    #[error("not unitary (deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("empty Kraus set")]
    EmptyKraus,

    #[error("target image must be mixed (purity {0})")]
    TargetNotMixed(f64),

    #[error("d=2 requires overlap with |0'⟩ (got {0:.3e})")]
    MissingOverlap(f64),

    #[error("coefficients must be nonzero")]
    ZeroCoefficient,

    #[error("coefficients must satisfy |alpha|^2 + |beta|^2 = 1 (got {0})")]
    CoefficientNorm(f64),

    #[error("radius too large: {0} (must be < 1)")]
    RadiusTooLarge(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, QopError>;
