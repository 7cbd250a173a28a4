//! Numerical tolerances used by every validation routine in the crate.
//!
//! Each constant is the boundary between "rounding noise" and "wrong":
//! defects below the constant are accepted (or silently repaired, where the
//! doc comment says so), defects above it are hard errors. They are grouped
//! here so a tolerance never has to be hunted down inside an algorithm.

/// Max allowed entry of |M - M†| before a matrix stops counting as Hermitian.
pub const HERMITICITY: f64 = 1e-10;

/// Eigenvalues of a state may dip this far below zero and still count as
/// positive semidefinite; anything lower is a real positivity violation.
pub const PSD: f64 = 1e-9;

/// Max allowed |tr(rho) - 1| for a normalized state.
pub const TRACE: f64 = 1e-10;

/// Bloch vectors may overshoot unit length by this much before rejection.
pub const BLOCH_RADIUS: f64 = 1e-9;

/// Effect eigenvalues may fall outside [0, 1] by this much.
pub const EFFECT_BOUNDS: f64 = 1e-9;

/// Max allowed entry of |sum of effects - I| for a complete POVM.
pub const POVM_COMPLETENESS: f64 = 1e-10;

/// Outcome probabilities within this distance of [0, 1] are clamped onto the
/// interval; excursions beyond it are errors, never clamped.
pub const PROBABILITY_CLAMP: f64 = 1e-12;

/// Max allowed |sum - 1| for a full outcome distribution.
pub const DISTRIBUTION_SUM: f64 = 1e-10;

/// Max allowed |sum - 1| for ensemble weights.
pub const WEIGHT_SUM: f64 = 1e-10;

/// Max allowed entry of |sum K†K - I| for a Kraus decomposition.
pub const KRAUS_COMPLETENESS: f64 = 1e-10;

/// Two ensembles must average to the same state within this entrywise bound
/// before a discrimination gap between them means anything.
pub const ENSEMBLE_MATCH: f64 = 1e-9;

/// Pseudo-density-matrix eigenvalues below minus this count as negative;
/// anything in (-NEGATIVITY, 0) is treated as zero.
pub const NEGATIVITY: f64 = 1e-9;
