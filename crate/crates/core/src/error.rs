//! Error type shared across the crate.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong when constructing or combining the
/// laboratory's objects. Validation variants carry the measured defect so
/// failures are diagnosable without re-running the check.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix contains a non-finite entry")]
    NonFinite,

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("operation requires dimension {expected}, got {dim}")]
    UnsupportedDimension { dim: usize, expected: usize },

    #[error("hermiticity violation: max |M - M\u{2020}| entry = {defect:.3e}")]
    NotHermitian { defect: f64 },

    #[error("positivity violation: min eigenvalue = {min_eigenvalue:.3e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("trace violation: trace = {trace}")]
    TraceNotOne { trace: f64 },

    #[error("Bloch radius {radius} exceeds 1")]
    RadiusTooLarge { radius: f64 },

    #[error("effect eigenvalues lie in [{min}, {max}], outside [0, 1]")]
    EffectOutOfBounds { min: f64, max: f64 },

    #[error("effects do not sum to the identity: max entry defect = {defect:.3e}")]
    IncompletePovm { defect: f64 },

    #[error("POVM labels and effects disagree or labels repeat")]
    MalformedPovm,

    #[error("probability {value} lies outside [0, 1] beyond tolerance")]
    ProbabilityOutOfRange { value: f64 },

    #[error("distribution sums to {sum}, expected 1")]
    DistributionNotNormalized { sum: f64 },

    #[error("outcome has zero probability; post-state undefined")]
    ZeroProbabilityOutcome,

    #[error("unknown outcome label `{label}`")]
    UnknownLabel { label: String },

    #[error("ensemble weight {weight} is negative")]
    NegativeWeight { weight: f64 },

    #[error("ensemble weights sum to {sum}, expected 1")]
    WeightsNotNormalized { sum: f64 },

    #[error("{what} must not be empty")]
    Empty { what: &'static str },

    #[error("logistic parameter {lambda} lies outside [0, 4]")]
    LambdaOutOfRange { lambda: f64 },

    #[error("Kraus operators violate completeness: max entry defect = {defect:.3e}")]
    KrausIncomplete { defect: f64 },

    #[error("no Kraus set matches the applied effect (closest entry defect = {defect:.3e})")]
    NoMatchingKrausSet { defect: f64 },

    #[error("parameter `{name}` = {value} lies outside its domain")]
    ParameterOutOfRange { name: &'static str, value: f64 },

    #[error("ensembles average to different states: max entry difference = {difference:.3e}")]
    EnsembleAverageMismatch { difference: f64 },

    #[error("Pauli index {index} lies outside 0..=3")]
    InvalidPauliIndex { index: usize },

    #[error("cannot normalize a zero vector")]
    ZeroVector,
}
