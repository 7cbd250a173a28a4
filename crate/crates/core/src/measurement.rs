//! Effects, POVMs, the Born rule, and single-stage outcome statistics.

use rand::Rng;
use rand::SeedableRng;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::state::{bloch_to_density, BlochVector, DensityMatrix};
use crate::tol;

/// Measurement operator Q with 0 <= Q <= I (within tolerance).
#[derive(Debug, Clone, PartialEq)]
pub struct Effect {
    operator: ComplexMatrix,
}

impl Effect {
    pub fn new(operator: ComplexMatrix) -> Result<Self> {
        let herm = operator.hermiticity_defect();
        if herm > tol::HERMITICITY {
            return Err(Error::NotHermitian { defect: herm });
        }
        let eigenvalues = operator.hermitian_eigenvalues();
        let min = eigenvalues.first().copied().unwrap_or(0.0);
        let max = eigenvalues.last().copied().unwrap_or(0.0);
        if min < -tol::EFFECT_BOUNDS || max > 1.0 + tol::EFFECT_BOUNDS {
            return Err(Error::EffectOutOfBounds { min, max });
        }
        Ok(Self { operator })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            operator: ComplexMatrix::identity(dim),
        }
    }

    /// Rank-one projector onto the qubit state pointing along `v`; `v` must
    /// be unit length for this to be a projector, which is not enforced.
    pub fn qubit_projector(v: &BlochVector) -> Self {
        Self {
            operator: bloch_to_density(v).matrix().clone(),
        }
    }

    pub fn operator(&self) -> &ComplexMatrix {
        &self.operator
    }

    pub fn dim(&self) -> usize {
        self.operator.dim()
    }
}

/// Complete, labeled measurement: effects summing to the identity.
#[derive(Debug, Clone)]
pub struct Povm {
    effects: Vec<Effect>,
    labels: Vec<String>,
}

impl Povm {
    pub fn new(effects: Vec<Effect>, labels: Vec<String>) -> Result<Self> {
        if effects.is_empty() {
            return Err(Error::Empty { what: "POVM" });
        }
        if effects.len() != labels.len() {
            return Err(Error::MalformedPovm);
        }
        for pair in 0..labels.len() {
            if labels[pair + 1..].contains(&labels[pair]) {
                return Err(Error::MalformedPovm);
            }
        }
        let dim = effects[0].dim();
        let mut sum = ComplexMatrix::zeros(dim);
        for effect in &effects {
            if effect.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: effect.dim(),
                });
            }
            sum = sum + effect.operator();
        }
        let defect = sum.max_abs_diff(&ComplexMatrix::identity(dim));
        if defect > tol::POVM_COMPLETENESS {
            return Err(Error::IncompletePovm { defect });
        }
        Ok(Self { effects, labels })
    }

    /// Single-outcome measurement {I}; useful as a do-nothing second stage.
    pub fn trivial(dim: usize) -> Self {
        Self {
            effects: vec![Effect::identity(dim)],
            labels: vec!["all".to_string()],
        }
    }

    pub fn effects(&self) -> &[Effect] {
        &self.effects
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.effects[0].dim()
    }

    pub fn effect_for(&self, label: &str) -> Result<&Effect> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| &self.effects[i])
            .ok_or_else(|| Error::UnknownLabel {
                label: label.to_string(),
            })
    }
}

/// {|z+><z+|, |z-><z-|} with labels `z+`, `z-`.
pub fn computational_basis_povm() -> Povm {
    basis_povm(BlochVector::Z_PLUS, BlochVector::Z_MINUS, "z+", "z-")
}

/// {|x+><x+|, |x-><x-|} with labels `x+`, `x-`.
pub fn x_basis_povm() -> Povm {
    basis_povm(BlochVector::X_PLUS, BlochVector::X_MINUS, "x+", "x-")
}

/// {|y+><y+|, |y-><y-|} with labels `y+`, `y-`.
pub fn y_basis_povm() -> Povm {
    basis_povm(BlochVector::Y_PLUS, BlochVector::Y_MINUS, "y+", "y-")
}

fn basis_povm(plus: BlochVector, minus: BlochVector, lp: &str, lm: &str) -> Povm {
    Povm::new(
        vec![Effect::qubit_projector(&plus), Effect::qubit_projector(&minus)],
        vec![lp.to_string(), lm.to_string()],
    )
    .expect("antipodal projectors sum to the identity")
}

/// Probabilities keyed by outcome label, in POVM order.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDistribution {
    entries: Vec<(String, f64)>,
}

impl OutcomeDistribution {
    pub fn new(entries: Vec<(String, f64)>) -> Result<Self> {
        for (_, p) in &entries {
            if *p < -tol::PROBABILITY_CLAMP || *p > 1.0 + tol::PROBABILITY_CLAMP {
                return Err(Error::ProbabilityOutOfRange { value: *p });
            }
        }
        let sum: f64 = entries.iter().map(|(_, p)| p).sum();
        if (sum - 1.0).abs() > tol::DISTRIBUTION_SUM {
            return Err(Error::DistributionNotNormalized { sum });
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[(String, f64)] {
        &self.entries
    }

    pub fn probability(&self, label: &str) -> Result<f64> {
        self.entries
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, p)| *p)
            .ok_or_else(|| Error::UnknownLabel {
                label: label.to_string(),
            })
    }
}

/// tr(rho q). Values within 1e-12 of [0, 1] are clamped onto the interval;
/// anything further out is an error, never silently repaired.
pub fn born_probability(q: &Effect, rho: &DensityMatrix) -> Result<f64> {
    if q.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            left: q.dim(),
            right: rho.dim(),
        });
    }
    let p = rho.matrix().trace_product(q.operator())?.re;
    clamp_probability(p)
}

pub(crate) fn clamp_probability(p: f64) -> Result<f64> {
    if p < 0.0 {
        if p >= -tol::PROBABILITY_CLAMP {
            Ok(0.0)
        } else {
            Err(Error::ProbabilityOutOfRange { value: p })
        }
    } else if p > 1.0 {
        if p <= 1.0 + tol::PROBABILITY_CLAMP {
            Ok(1.0)
        } else {
            Err(Error::ProbabilityOutOfRange { value: p })
        }
    } else {
        Ok(p)
    }
}

/// Born probability of every POVM element, validated to sum to 1.
pub fn outcome_distribution(m: &Povm, rho: &DensityMatrix) -> Result<OutcomeDistribution> {
    let mut entries = Vec::with_capacity(m.len());
    for (effect, label) in m.effects().iter().zip(m.labels()) {
        entries.push((label.clone(), born_probability(effect, rho)?));
    }
    OutcomeDistribution::new(entries)
}

/// Draws one outcome by inverse CDF over `outcome_distribution`.
/// Deterministic: the same seed always yields the same label.
pub fn sample_outcome(m: &Povm, rho: &DensityMatrix, seed: u64) -> Result<String> {
    let dist = outcome_distribution(m, rho)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let u: f64 = rng.gen_range(0.0..1.0);
    let mut cumulative = 0.0;
    for (label, p) in dist.entries() {
        cumulative += p;
        if u < cumulative {
            return Ok(label.clone());
        }
    }
    // Rounding can leave the total a hair under u; fall back to the last label.
    Ok(dist.entries().last().expect("POVM is non-empty").0.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::validate_density;
    use approx::assert_abs_diff_eq;

    #[test]
    fn born_probability_matches_known_values() {
        let mixed = DensityMatrix::maximally_mixed(2);
        let half_z = bloch_to_density(&BlochVector::new(0.0, 0.0, 0.5).unwrap());
        let z_plus = Effect::qubit_projector(&BlochVector::Z_PLUS);

        assert_abs_diff_eq!(born_probability(&Effect::identity(2), &half_z).unwrap(), 1.0);
        assert_abs_diff_eq!(born_probability(&z_plus, &mixed).unwrap(), 0.5);
        assert_abs_diff_eq!(
            born_probability(&z_plus, &half_z).unwrap(),
            0.75,
            epsilon = 1e-14
        );
        assert!(born_probability(&z_plus, &DensityMatrix::maximally_mixed(3)).is_err());
    }

    #[test]
    fn clamping_is_narrow() {
        // Slightly negative eigenvalue within effect tolerance: probability
        // against the aligned projector is clamped to zero...
        let tiny = Effect::new(ComplexMatrix::from_real_diagonal(&[-5e-13, 1.0]).unwrap())
            .unwrap();
        let z_plus_state = bloch_to_density(&BlochVector::Z_PLUS);
        assert_eq!(born_probability(&tiny, &z_plus_state).unwrap(), 0.0);

        // ...but a larger excursion is an error, not a repair.
        let too_negative =
            Effect::new(ComplexMatrix::from_real_diagonal(&[-5e-10, 1.0]).unwrap()).unwrap();
        assert!(matches!(
            born_probability(&too_negative, &z_plus_state),
            Err(Error::ProbabilityOutOfRange { .. })
        ));
    }

    #[test]
    fn computational_basis_is_complete_and_unbiased() {
        let povm = computational_basis_povm();
        assert_eq!(povm.labels(), ["z+", "z-"]);

        let mut sum = ComplexMatrix::zeros(2);
        for effect in povm.effects() {
            sum = sum + effect.operator();
        }
        assert!(sum.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-15);

        let dist = outcome_distribution(&povm, &DensityMatrix::maximally_mixed(2)).unwrap();
        assert_abs_diff_eq!(dist.probability("z+").unwrap(), 0.5);
        assert_abs_diff_eq!(dist.probability("z-").unwrap(), 0.5);
    }

    #[test]
    fn distributions_match_known_states() {
        let povm = computational_basis_povm();
        let pure = bloch_to_density(&BlochVector::Z_PLUS);
        let dist = outcome_distribution(&povm, &pure).unwrap();
        assert_abs_diff_eq!(dist.probability("z+").unwrap(), 1.0);
        assert_abs_diff_eq!(dist.probability("z-").unwrap(), 0.0);

        let tilted = bloch_to_density(&BlochVector::new(0.0, 0.0, 0.5).unwrap());
        let dist = outcome_distribution(&povm, &tilted).unwrap();
        assert_abs_diff_eq!(dist.probability("z+").unwrap(), 0.75, epsilon = 1e-14);
        assert_abs_diff_eq!(dist.probability("z-").unwrap(), 0.25, epsilon = 1e-14);
        assert!(dist.probability("x+").is_err());
    }

    #[test]
    fn povm_validation_catches_malformed_sets() {
        let z = Effect::qubit_projector(&BlochVector::Z_PLUS);
        let zm = Effect::qubit_projector(&BlochVector::Z_MINUS);

        // Duplicate labels.
        assert!(matches!(
            Povm::new(vec![z.clone(), zm.clone()], vec!["a".into(), "a".into()]),
            Err(Error::MalformedPovm)
        ));
        // Effects do not sum to the identity.
        assert!(matches!(
            Povm::new(vec![z.clone(), z.clone()], vec!["a".into(), "b".into()]),
            Err(Error::IncompletePovm { .. })
        ));
        // Effect eigenvalue above 1.
        assert!(matches!(
            Effect::new(ComplexMatrix::from_real_diagonal(&[1.5, 0.0]).unwrap()),
            Err(Error::EffectOutOfBounds { .. })
        ));
    }

    #[test]
    fn effects_survive_validation_round_trip() {
        for effect in computational_basis_povm().effects() {
            assert!(Effect::new(effect.operator().clone()).is_ok());
        }
        // Basis projectors are themselves valid states.
        for effect in x_basis_povm().effects().iter().chain(y_basis_povm().effects()) {
            assert!(validate_density(effect.operator().clone()).is_ok());
        }
    }

    #[test]
    fn sampling_is_deterministic_and_respects_support() {
        let povm = computational_basis_povm();
        let pure = bloch_to_density(&BlochVector::Z_PLUS);
        for seed in 0..32 {
            assert_eq!(sample_outcome(&povm, &pure, seed).unwrap(), "z+");
        }

        let mixed = DensityMatrix::maximally_mixed(2);
        let first = sample_outcome(&povm, &mixed, 7).unwrap();
        let second = sample_outcome(&povm, &mixed, 7).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn sample_frequencies_track_the_distribution() {
        let povm = computational_basis_povm();
        let mixed = DensityMatrix::maximally_mixed(2);
        let n = 20_000;
        let hits = (0..n)
            .filter(|&seed| sample_outcome(&povm, &mixed, seed).unwrap() == "z+")
            .count();
        let freq = hits as f64 / n as f64;
        assert!((freq - 0.5).abs() < 0.01, "frequency {freq} too far from 0.5");
    }

    #[test]
    fn trivial_povm_has_one_certain_outcome() {
        let povm = Povm::trivial(2);
        let dist = outcome_distribution(&povm, &DensityMatrix::maximally_mixed(2)).unwrap();
        assert_eq!(dist.entries(), [("all".to_string(), 1.0)]);
    }
}
