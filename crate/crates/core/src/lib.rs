//! A desk-scale quantum-measurement laboratory.
//!
//! The crate models qubit states, POVM measurements, and pluggable
//! post-measurement update rules: the standard square-root/Kraus rule, a
//! deliberately nonlinear logistic transformation of the Bloch radius, and a
//! probability-dependent depolarizing rule. On top of those sit diagnostics
//! that make convexity arguments mechanically checkable: a randomized
//! convex-linearity oracle, exact effect reconstruction from outcome
//! probability functions, per-outcome-pair POVM fitting for two-stage
//! experiments, ensemble discrimination of equal mixtures, and two-time
//! pseudo-density matrices with their negativity.
//!
//! Batch evaluation (linearity trials, held-out residuals) runs
//! data-parallel under the default `parallel` feature and sequentially
//! without it; results are bit-identical either way.

pub mod analysis;
pub mod batch;
pub mod error;
pub mod matrix;
pub mod measurement;
pub mod sample;
pub mod sequential;
pub mod state;
pub mod temporal;
pub mod tol;
pub mod update;

pub use error::{Error, Result};
pub use matrix::ComplexMatrix;
pub use measurement::{Effect, OutcomeDistribution, Povm};
pub use sequential::{JointDistribution, TwoStageExperiment};
pub use state::{BlochVector, DensityMatrix, EnsembleDecomposition};
pub use update::{KrausSet, LudersRule, UpdateOutcome, UpdateRule};
