use thiserror::Error;

/// Every failure the library reports.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid tensor space: {0}")]
    InvalidSpace(String),
    #[error("subsystem label collision: {0:?}")]
    LabelCollision(String),
    #[error("unknown subsystem label: {0:?}")]
    UnknownLabel(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("spaces differ: {left} vs {right}")]
    SpaceMismatch { left: String, right: String },
    #[error("state is not normalized (norm = {norm})")]
    NotNormalized { norm: f64 },
    #[error("zero-norm state")]
    ZeroNorm,
    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("matrix is not unitary (max deviation {deviation:e})")]
    NotUnitary { deviation: f64 },
    #[error("invalid density operator: {0}")]
    InvalidDensity(String),
    #[error("basis is not orthonormal (max Gram deviation {deviation:e})")]
    BasisNotOrthonormal { deviation: f64 },
    #[error("basis is incomplete ({found} of {expected} vectors)")]
    BasisIncomplete { expected: usize, found: usize },
    #[error("invalid bipartition: {0}")]
    InvalidBipartition(String),
    #[error("zero-probability projection")]
    ZeroProbabilityProjection,
    #[error("invalid projector set: {0}")]
    InvalidProjectorSet(String),
    #[error("negative evolution time {0} (master equation runs forward only)")]
    NegativeTime(f64),
    #[error("negative rate A[{row}][{col}] = {value}")]
    NegativeRate { row: usize, col: usize, value: f64 },
    #[error("rate matrix does not conserve probability: {0}")]
    UnbalancedRates(String),
    #[error("invalid probability vector: {0}")]
    InvalidProbability(String),
    #[error("apparatus is not in its ready state (fidelity {fidelity})")]
    ApparatusNotReady { fidelity: f64 },
    #[error("pointer-state count mismatch: {pointers} pointer states for {outcomes} outcomes")]
    PointerCountMismatch { pointers: usize, outcomes: usize },
    #[error("chain link {0} activated twice")]
    LinkActivatedTwice(usize),
    #[error("wave function not negligible at grid boundary (|value| = {value:e})")]
    GridTooNarrow { value: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("kernel arguments are not aligned with the midpoint grid")]
    OffGridMidpoint,
    #[error("history length {found} does not match {expected} time slices")]
    HistoryLength { expected: usize, found: usize },
    #[error("nothing to measure: {0}")]
    NothingToMeasure(String),
    #[error("environment too small: need dimension {needed}, got {got}")]
    EnvironmentTooSmall { needed: usize, got: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
