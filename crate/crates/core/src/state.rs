//! Density matrices, Bloch-sphere geometry, ensemble decompositions, and
//! distances between states.
//!
//! Types are dimension-generic; the Bloch operations guard `dim == 2`
//! explicitly since everything downstream of them is qubit geometry.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::tol;

/// Hermitian, positive-semidefinite, unit-trace operator.
///
/// Construction always validates, in order: hermiticity, positivity, trace.
/// The first violated invariant is reported with its measured defect.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates `m` as a quantum state. Checks hermiticity, then
    /// positivity, then trace, and reports the first failure with the
    /// measured defect.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let herm = m.hermiticity_defect();
        if herm > tol::HERMITICITY {
            return Err(Error::NotHermitian { defect: herm });
        }
        let eigenvalues = m.hermitian_eigenvalues();
        let min = eigenvalues.first().copied().unwrap_or(0.0);
        if min < -tol::PSD {
            return Err(Error::NotPositive {
                min_eigenvalue: min,
            });
        }
        let trace = m.trace().re;
        if (trace - 1.0).abs() > tol::TRACE {
            return Err(Error::TraceNotOne { trace });
        }
        Ok(Self { matrix: m })
    }

    /// Wraps a matrix that is valid by construction (convex mixtures of
    /// valid states, normalized rule outputs). Skips the eigensolve.
    pub(crate) fn from_matrix_unchecked(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::from_matrix_unchecked(ComplexMatrix::identity(dim).scale(1.0 / dim as f64))
    }

    /// Pure state |psi><psi| from an amplitude vector, normalizing it first.
    pub fn pure(amplitudes: &[Complex64]) -> Result<Self> {
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if !norm_sq.is_finite() {
            return Err(Error::NonFinite);
        }
        if norm_sq <= 0.0 {
            return Err(Error::ZeroVector);
        }
        let dim = amplitudes.len();
        let m = ComplexMatrix::from_fn(dim, |i, j| {
            amplitudes[i] * amplitudes[j].conj() / norm_sq
        })?;
        Ok(Self::from_matrix_unchecked(m))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// tr(rho^2); 1 for pure states, 1/d for the maximally mixed state.
    pub fn purity(&self) -> f64 {
        self.matrix
            .trace_product(&self.matrix)
            .expect("same matrix, same dim")
            .re
    }
}

/// Point in the closed unit ball parameterizing a qubit state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector {
    x: f64,
    y: f64,
    z: f64,
}

impl BlochVector {
    pub const ZERO: BlochVector = BlochVector { x: 0.0, y: 0.0, z: 0.0 };
    pub const X_PLUS: BlochVector = BlochVector { x: 1.0, y: 0.0, z: 0.0 };
    pub const X_MINUS: BlochVector = BlochVector { x: -1.0, y: 0.0, z: 0.0 };
    pub const Y_PLUS: BlochVector = BlochVector { x: 0.0, y: 1.0, z: 0.0 };
    pub const Y_MINUS: BlochVector = BlochVector { x: 0.0, y: -1.0, z: 0.0 };
    pub const Z_PLUS: BlochVector = BlochVector { x: 0.0, y: 0.0, z: 1.0 };
    pub const Z_MINUS: BlochVector = BlochVector { x: 0.0, y: 0.0, z: -1.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(Error::NonFinite);
        }
        let radius = (x * x + y * y + z * z).sqrt();
        if radius > 1.0 + tol::BLOCH_RADIUS {
            return Err(Error::RadiusTooLarge { radius });
        }
        Ok(Self { x, y, z })
    }

    /// Used where the components are traces of a validated state, whose
    /// radius can overshoot 1 by up to twice the positivity tolerance.
    pub(crate) fn new_unchecked(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn radius(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            x: self.x * factor,
            y: self.y * factor,
            z: self.z * factor,
        }
    }
}

/// (I + v . sigma) / 2. Total on typed input: the radius bound is already
/// enforced by `BlochVector`, and any such point is a valid state.
pub fn bloch_to_density(v: &BlochVector) -> DensityMatrix {
    let half = 0.5;
    let m = ComplexMatrix::from_rows(&[
        vec![
            Complex64::new(half * (1.0 + v.z), 0.0),
            Complex64::new(half * v.x, -half * v.y),
        ],
        vec![
            Complex64::new(half * v.x, half * v.y),
            Complex64::new(half * (1.0 - v.z), 0.0),
        ],
    ])
    .expect("2x2 finite by construction");
    DensityMatrix::from_matrix_unchecked(m)
}

/// Components tr(rho sigma_k). Inverse of `bloch_to_density` on qubits.
pub fn density_to_bloch(rho: &DensityMatrix) -> Result<BlochVector> {
    if rho.dim() != 2 {
        return Err(Error::UnsupportedDimension {
            dim: rho.dim(),
            expected: 2,
        });
    }
    let mut components = [0.0; 3];
    for (k, slot) in components.iter_mut().enumerate() {
        let sigma = ComplexMatrix::pauli(k + 1).expect("index in range");
        *slot = rho.matrix().trace_product(&sigma)?.re;
    }
    Ok(BlochVector::new_unchecked(
        components[0],
        components[1],
        components[2],
    ))
}

/// Weighted list of states {(p_i, rho_i)} decomposing their average.
#[derive(Debug, Clone)]
pub struct EnsembleDecomposition {
    members: Vec<(f64, DensityMatrix)>,
}

impl EnsembleDecomposition {
    pub fn new(members: Vec<(f64, DensityMatrix)>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::Empty { what: "ensemble" });
        }
        let dim = members[0].1.dim();
        for (weight, state) in &members {
            if *weight < 0.0 || !weight.is_finite() {
                return Err(Error::NegativeWeight { weight: *weight });
            }
            if state.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: state.dim(),
                });
            }
        }
        let sum: f64 = members.iter().map(|(w, _)| w).sum();
        if (sum - 1.0).abs() > tol::WEIGHT_SUM {
            return Err(Error::WeightsNotNormalized { sum });
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[(f64, DensityMatrix)] {
        &self.members
    }

    pub fn dim(&self) -> usize {
        self.members[0].1.dim()
    }

    /// The average state sum_i p_i rho_i. Convex combinations of valid
    /// states are valid, so no re-validation is needed.
    pub fn mix(&self) -> DensityMatrix {
        let mut acc = ComplexMatrix::zeros(self.dim());
        for (weight, state) in &self.members {
            acc = acc + state.matrix().scale(*weight);
        }
        DensityMatrix::from_matrix_unchecked(acc)
    }
}

/// Half the trace norm of the difference, in [0, 1].
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: sigma.dim(),
        });
    }
    let diff = rho.matrix() - sigma.matrix();
    let total: f64 = diff.hermitian_eigenvalues().iter().map(|v| v.abs()).sum();
    Ok(0.5 * total)
}

/// Spec'd entry point for turning a raw matrix into a typed state; the error
/// names the violated invariant and carries the measured defect.
pub fn validate_density(m: ComplexMatrix) -> Result<DensityMatrix> {
    DensityMatrix::new(m)
}
