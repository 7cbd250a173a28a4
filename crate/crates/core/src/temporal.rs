//! Two-time pseudo-density matrices.
//!
//! The same system is probed at two times: a Pauli observable is measured
//! (standard update) at time 1, the state passes through a channel, and a
//! Pauli observable is read at time 2. Packing all correlators into
//! R = (1/4) sum c_ij sigma_i (x) sigma_j yields a Hermitian unit-trace
//! operator whose marginals are the single-time states but which may have
//! negative eigenvalues; the negativity measures how far the two-time object
//! is from any valid spatial state.

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::state::DensityMatrix;
use crate::tol;

/// Completely positive trace-preserving map in Kraus form.
#[derive(Debug, Clone)]
pub struct Channel {
    kraus: Vec<ComplexMatrix>,
}

impl Channel {
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::Empty { what: "Kraus list" });
        }
        let dim = kraus[0].dim();
        let mut total = ComplexMatrix::zeros(dim);
        for k in &kraus {
            if k.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: k.dim(),
                });
            }
            total = total + k.adjoint() * k;
        }
        let defect = total.max_abs_diff(&ComplexMatrix::identity(dim));
        if defect > tol::KRAUS_COMPLETENESS {
            return Err(Error::KrausIncomplete { defect });
        }
        Ok(Self { kraus })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            kraus: vec![ComplexMatrix::identity(dim)],
        }
    }

    /// Conjugation by a single unitary; rejected unless U†U = I.
    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        Self::new(vec![u])
    }

    /// Mixes toward I/2 with the given strength: rho goes to
    /// (1 - strength) rho + strength I/2. Qubit only.
    pub fn depolarizing(strength: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&strength) || !strength.is_finite() {
            return Err(Error::ParameterOutOfRange {
                name: "strength",
                value: strength,
            });
        }
        let keep = (1.0 - 0.75 * strength).sqrt();
        let flip = (0.25 * strength).sqrt();
        let mut kraus = vec![ComplexMatrix::identity(2).scale(keep)];
        for k in 1..=3 {
            kraus.push(ComplexMatrix::pauli(k)?.scale(flip));
        }
        Self::new(kraus)
    }

    pub fn fully_depolarizing() -> Self {
        Self::depolarizing(1.0).expect("strength 1 is in range")
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn dim(&self) -> usize {
        self.kraus[0].dim()
    }

    /// sum K m K† on a raw matrix; linear, no normalization.
    pub fn apply_matrix(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.dim());
        for k in &self.kraus {
            acc = acc + k * m * k.adjoint();
        }
        acc
    }

    /// Channel action on a state. Trace-preserving complete positivity
    /// keeps the output a valid state without re-validation.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: rho.dim(),
            });
        }
        Ok(DensityMatrix::from_matrix_unchecked(
            self.apply_matrix(rho.matrix()),
        ))
    }
}

/// 4x4 Hermitian unit-trace operator encoding two-time correlations.
/// Positivity is deliberately NOT required.
#[derive(Debug, Clone)]
pub struct PseudoDensityMatrix {
    matrix: ComplexMatrix,
    eigenvalues: Vec<f64>,
}

impl PseudoDensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if matrix.dim() != 4 {
            return Err(Error::UnsupportedDimension {
                dim: matrix.dim(),
                expected: 4,
            });
        }
        let herm = matrix.hermiticity_defect();
        if herm > tol::HERMITICITY {
            return Err(Error::NotHermitian { defect: herm });
        }
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > tol::TRACE {
            return Err(Error::TraceNotOne { trace });
        }
        let eigenvalues = matrix.hermitian_eigenvalues();
        Ok(Self {
            matrix,
            eigenvalues,
        })
    }

    /// Embeds a spatial two-qubit product state; always PSD, which makes it
    /// the control case against genuinely temporal constructions.
    pub fn from_product(a: &DensityMatrix, b: &DensityMatrix) -> Result<Self> {
        if a.dim() != 2 || b.dim() != 2 {
            return Err(Error::UnsupportedDimension {
                dim: a.dim().max(b.dim()),
                expected: 2,
            });
        }
        Self::new(a.matrix().kronecker(b.matrix()))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Ascending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Trace over the second (time-2) slot: the time-1 marginal.
    pub fn marginal_first(&self) -> ComplexMatrix {
        self.partial_trace(true)
    }

    /// Trace over the first (time-1) slot: the time-2 marginal.
    pub fn marginal_second(&self) -> ComplexMatrix {
        self.partial_trace(false)
    }

    fn partial_trace(&self, over_second: bool) -> ComplexMatrix {
        ComplexMatrix::from_fn(2, |a, b| {
            let mut acc = num_complex::Complex64::ZERO;
            for c in 0..2 {
                let (row, col) = if over_second {
                    (2 * a + c, 2 * b + c)
                } else {
                    (2 * c + a, 2 * c + b)
                };
                acc += self.matrix.entry(row, col);
            }
            acc
        })
        .expect("fixed 2x2 shape")
    }
}

/// Sum of |negative eigenvalues|, ignoring rounding-scale dips.
pub fn negativity(p: &PseudoDensityMatrix) -> f64 {
    p.eigenvalues()
        .iter()
        .filter(|&&v| v < -tol::NEGATIVITY)
        .map(|v| v.abs())
        .sum()
}

/// Pauli correlator between the two times. Index 0 is the identity, so
/// c_00 = 1, c_i0 and c_0j are the single-time Pauli expectations, and for
/// i, j >= 1 the value is sum_a a tr[sigma_j Phi(Pi_a rho Pi_a)] with Pi_a
/// the eigenprojectors of sigma_i. The time-1 update is the standard
/// projective one: this object belongs to the linear theory.
pub fn two_time_correlator(
    i: usize,
    j: usize,
    rho: &DensityMatrix,
    ch: &Channel,
) -> Result<f64> {
    if i > 3 {
        return Err(Error::InvalidPauliIndex { index: i });
    }
    if j > 3 {
        return Err(Error::InvalidPauliIndex { index: j });
    }
    if rho.dim() != 2 || ch.dim() != 2 {
        return Err(Error::UnsupportedDimension {
            dim: rho.dim().max(ch.dim()),
            expected: 2,
        });
    }
    match (i, j) {
        (0, 0) => Ok(1.0),
        (_, 0) => Ok(rho.matrix().trace_product(&ComplexMatrix::pauli(i)?)?.re),
        (0, _) => {
            let evolved = ch.apply(rho)?;
            Ok(evolved.matrix().trace_product(&ComplexMatrix::pauli(j)?)?.re)
        }
        (_, _) => {
            let sigma_i = ComplexMatrix::pauli(i)?;
            let sigma_j = ComplexMatrix::pauli(j)?;
            let mut total = 0.0;
            for sign in [1.0_f64, -1.0] {
                let projector =
                    (ComplexMatrix::identity(2) + sigma_i.scale(sign)).scale(0.5);
                let branch = &projector * rho.matrix() * &projector;
                let evolved = ch.apply_matrix(&branch);
                total += sign * evolved.trace_product(&sigma_j)?.re;
            }
            Ok(total)
        }
    }
}

/// R = (1/4) sum_ij c_ij sigma_i (x) sigma_j over all sixteen index pairs.
pub fn build_pdm(rho: &DensityMatrix, ch: &Channel) -> Result<PseudoDensityMatrix> {
    let mut acc = ComplexMatrix::zeros(4);
    for i in 0..4 {
        let sigma_i = ComplexMatrix::pauli(i)?;
        for j in 0..4 {
            let sigma_j = ComplexMatrix::pauli(j)?;
            let c = two_time_correlator(i, j, rho, ch)?;
            acc = acc + sigma_i.kronecker(&sigma_j).scale(0.25 * c);
        }
    }
    PseudoDensityMatrix::new(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{bloch_to_density, validate_density, BlochVector};
    use approx::assert_abs_diff_eq;

    #[test]
    fn correlator_normalization_and_known_values() {
        let mixed = DensityMatrix::maximally_mixed(2);
        let id = Channel::identity(2);
        assert_abs_diff_eq!(two_time_correlator(0, 0, &mixed, &id).unwrap(), 1.0);
        // Repeated reads along one axis are perfectly correlated...
        assert_abs_diff_eq!(
            two_time_correlator(3, 3, &mixed, &id).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        // ...and orthogonal axes are uncorrelated.
        assert_abs_diff_eq!(
            two_time_correlator(1, 3, &mixed, &id).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        assert!(two_time_correlator(4, 0, &mixed, &id).is_err());
    }

    #[test]
    fn single_time_correlators_are_pauli_expectations() {
        let rho = bloch_to_density(&BlochVector::new(0.3, -0.2, 0.4).unwrap());
        let ch = Channel::depolarizing(0.5).unwrap();
        assert_abs_diff_eq!(
            two_time_correlator(1, 0, &rho, &ch).unwrap(),
            0.3,
            epsilon = 1e-12
        );
        // Depolarizing at strength s shrinks every Bloch component by 1 - s.
        assert_abs_diff_eq!(
            two_time_correlator(0, 3, &rho, &ch).unwrap(),
            0.2,
            epsilon = 1e-12
        );
    }

    #[test]
    fn identity_channel_on_center_gives_half_swap() {
        let pdm = build_pdm(&DensityMatrix::maximally_mixed(2), &Channel::identity(2)).unwrap();
        let eigen = pdm.eigenvalues();
        assert_abs_diff_eq!(eigen[0], -0.5, epsilon = 1e-9);
        for v in &eigen[1..] {
            assert_abs_diff_eq!(*v, 0.5, epsilon = 1e-9);
        }
        assert_abs_diff_eq!(pdm.matrix().trace().re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(negativity(&pdm), 0.5, epsilon = 1e-9);

        // Entrywise: half of the SWAP matrix.
        let pairs = [(0, 0), (1, 2), (2, 1), (3, 3)];
        let swap = ComplexMatrix::from_fn(4, |r, c| {
            if pairs.contains(&(r, c)) {
                num_complex::Complex64::new(0.5, 0.0)
            } else {
                num_complex::Complex64::ZERO
            }
        })
        .unwrap();
        assert!(pdm.matrix().max_abs_diff(&swap) < 1e-12);
    }

    #[test]
    fn fully_depolarizing_channel_gives_psd_quarter_identity() {
        let pdm = build_pdm(
            &DensityMatrix::maximally_mixed(2),
            &Channel::fully_depolarizing(),
        )
        .unwrap();
        assert!(pdm.matrix().max_abs_diff(&ComplexMatrix::identity(4).scale(0.25)) < 1e-12);
        assert_abs_diff_eq!(negativity(&pdm), 0.0);
        assert!(pdm.min_eigenvalue() > -tol::NEGATIVITY);
    }

    #[test]
    fn marginals_recover_the_single_time_states() {
        let rho = bloch_to_density(&BlochVector::new(0.4, 0.1, -0.3).unwrap());
        let ch = Channel::depolarizing(0.35).unwrap();
        let pdm = build_pdm(&rho, &ch).unwrap();
        assert!(pdm.marginal_first().max_abs_diff(rho.matrix()) < 1e-10);
        let evolved = ch.apply(&rho).unwrap();
        assert!(pdm.marginal_second().max_abs_diff(evolved.matrix()) < 1e-10);
    }

    #[test]
    fn product_states_embed_as_psd() {
        let a = bloch_to_density(&BlochVector::new(0.3, 0.1, 0.2).unwrap());
        let b = bloch_to_density(&BlochVector::new(0.0, 0.5, -0.1).unwrap());
        let pdm = PseudoDensityMatrix::from_product(&a, &b).unwrap();
        assert!(pdm.min_eigenvalue() > -tol::NEGATIVITY);
        assert_abs_diff_eq!(negativity(&pdm), 0.0);
    }

    #[test]
    fn channel_validation_and_action() {
        // Non-trace-preserving list is rejected.
        let half = ComplexMatrix::identity(2).scale(0.5);
        assert!(matches!(
            Channel::new(vec![half]),
            Err(Error::KrausIncomplete { .. })
        ));
        assert!(matches!(
            Channel::depolarizing(1.5),
            Err(Error::ParameterOutOfRange { .. })
        ));
        // Non-unitary single operator is rejected through the same check.
        assert!(Channel::unitary(ComplexMatrix::identity(2).scale(0.9)).is_err());

        let rho = bloch_to_density(&BlochVector::new(0.2, 0.6, 0.1).unwrap());
        let out = Channel::depolarizing(0.4).unwrap().apply(&rho).unwrap();
        assert!(validate_density(out.matrix().clone()).is_ok());
        let mixed = Channel::fully_depolarizing().apply(&rho).unwrap();
        assert!(mixed.matrix().max_abs_diff(&ComplexMatrix::identity(2).scale(0.5)) < 1e-12);
    }
}
