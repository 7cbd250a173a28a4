//! Post-measurement state-update rules.
//!
//! Three families are provided. The standard rule conjugates by the effect's
//! square root (or by explicit Kraus operators) and renormalizes; it is the
//! linear baseline. The logistic rule replaces the Bloch radius r by
//! lambda*r*(1-r) while keeping the direction, independent of the observed
//! outcome; it is deliberately nonlinear in the state. The
//! probability-dependent rule mixes the standard post-state toward I/d with
//! strength equal to the outcome probability itself.

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::measurement::{born_probability, Effect};
use crate::state::{bloch_to_density, density_to_bloch, DensityMatrix};
use crate::tol;

/// Kraus operators {K_m} for one outcome; sum K†K must stay below I.
#[derive(Debug, Clone)]
pub struct KrausSet {
    operators: Vec<ComplexMatrix>,
}

impl KrausSet {
    pub fn new(operators: Vec<ComplexMatrix>) -> Result<Self> {
        if operators.is_empty() {
            return Err(Error::Empty { what: "Kraus set" });
        }
        let dim = operators[0].dim();
        for op in &operators {
            if op.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: op.dim(),
                });
            }
        }
        let set = Self { operators };
        let gram = set.completeness_operator();
        let eigenvalues = gram.hermitian_eigenvalues();
        let min = eigenvalues.first().copied().unwrap_or(0.0);
        let max = eigenvalues.last().copied().unwrap_or(0.0);
        if min < -tol::EFFECT_BOUNDS || max > 1.0 + tol::EFFECT_BOUNDS {
            return Err(Error::EffectOutOfBounds { min, max });
        }
        Ok(set)
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn dim(&self) -> usize {
        self.operators[0].dim()
    }

    /// sum K†K, the effect this set implements.
    pub fn completeness_operator(&self) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.dim());
        for k in &self.operators {
            acc = acc + k.adjoint() * k;
        }
        acc
    }

    fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.dim());
        for k in &self.operators {
            acc = acc + k * rho * k.adjoint();
        }
        acc
    }
}

/// Standard update. With no Kraus sets the square-root form is used; with
/// Kraus sets, the set whose sum K†K equals the applied effect is selected.
#[derive(Debug, Clone, Default)]
pub struct LudersRule {
    kraus: Option<Vec<KrausSet>>,
}

impl LudersRule {
    /// Square-root form: post ∝ √f ρ √f.
    pub fn standard() -> Self {
        Self { kraus: None }
    }

    /// Kraus form. The sets must jointly resolve the identity.
    pub fn with_kraus(sets: Vec<KrausSet>) -> Result<Self> {
        if sets.is_empty() {
            return Err(Error::Empty { what: "Kraus family" });
        }
        let dim = sets[0].dim();
        let mut total = ComplexMatrix::zeros(dim);
        for set in &sets {
            if set.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: set.dim(),
                });
            }
            total = total + set.completeness_operator();
        }
        let defect = total.max_abs_diff(&ComplexMatrix::identity(dim));
        if defect > tol::KRAUS_COMPLETENESS {
            return Err(Error::KrausIncomplete { defect });
        }
        Ok(Self { kraus: Some(sets) })
    }

    /// Unnormalized image of rho under the outcome f: √f ρ √f, or the
    /// matching Kraus set applied to rho.
    fn raw_image(&self, f: &Effect, rho: &DensityMatrix) -> Result<ComplexMatrix> {
        match &self.kraus {
            None => {
                let root = f.operator().hermitian_sqrt();
                Ok(&root * rho.matrix() * &root)
            }
            Some(sets) => {
                let mut best: Option<(f64, &KrausSet)> = None;
                for set in sets {
                    let defect = set.completeness_operator().max_abs_diff(f.operator());
                    if best.map_or(true, |(d, _)| defect < d) {
                        best = Some((defect, set));
                    }
                }
                let (defect, set) = best.expect("kraus family is non-empty");
                if defect > tol::KRAUS_COMPLETENESS {
                    return Err(Error::NoMatchingKrausSet { defect });
                }
                Ok(set.apply(rho.matrix()))
            }
        }
    }
}

/// Tagged state-update rule.
#[derive(Debug, Clone)]
pub enum UpdateRule {
    Luders(LudersRule),
    LogisticBloch { lambda: f64 },
    ProbabilityDependent { base: LudersRule },
}

impl UpdateRule {
    pub fn luders() -> Self {
        Self::Luders(LudersRule::standard())
    }

    pub fn luders_with_kraus(sets: Vec<KrausSet>) -> Result<Self> {
        Ok(Self::Luders(LudersRule::with_kraus(sets)?))
    }

    pub fn logistic_bloch(lambda: f64) -> Result<Self> {
        if !(0.0..=4.0).contains(&lambda) || !lambda.is_finite() {
            return Err(Error::LambdaOutOfRange { lambda });
        }
        Ok(Self::LogisticBloch { lambda })
    }

    pub fn probability_dependent(base: LudersRule) -> Self {
        Self::ProbabilityDependent { base }
    }
}

/// Normalized post-state plus the probability of the outcome producing it.
#[derive(Debug, Clone)]
pub struct UpdateOutcome {
    pub post_state: DensityMatrix,
    pub probability: f64,
}

/// Applies `rule` to `rho` conditioned on outcome `f`. Errors when the
/// outcome has zero probability: the conditional post-state is undefined.
pub fn apply_update(rule: &UpdateRule, f: &Effect, rho: &DensityMatrix) -> Result<UpdateOutcome> {
    let probability = born_probability(f, rho)?;
    if probability <= 0.0 {
        return Err(Error::ZeroProbabilityOutcome);
    }
    let post_state = match rule {
        UpdateRule::Luders(base) => {
            let raw = base.raw_image(f, rho)?;
            normalize(raw)
        }
        UpdateRule::LogisticBloch { lambda } => logistic_post(*lambda, rho)?,
        UpdateRule::ProbabilityDependent { base } => {
            let raw = base.raw_image(f, rho)?;
            depolarize(&normalize(raw), probability)
        }
    };
    Ok(UpdateOutcome {
        post_state,
        probability,
    })
}

/// The total map rho -> post * probability, defined as the zero matrix for
/// zero-probability outcomes. Its trace always equals the Born probability.
pub fn unnormalized_map(rule: &UpdateRule, f: &Effect, rho: &DensityMatrix) -> Result<ComplexMatrix> {
    let probability = born_probability(f, rho)?;
    if probability <= 0.0 {
        return Ok(ComplexMatrix::zeros(rho.dim()));
    }
    let outcome = apply_update(rule, f, rho)?;
    Ok(outcome.post_state.matrix().scale(outcome.probability))
}

/// Divides the raw image by its own trace. The image of a valid state under
/// a completely positive map is Hermitian and PSD, so after normalization it
/// is a valid state without re-running the eigensolver.
fn normalize(raw: ComplexMatrix) -> DensityMatrix {
    let trace = raw.trace().re;
    DensityMatrix::from_matrix_unchecked(raw.scale(1.0 / trace))
}

/// (1 - p) * rho + p * I/d.
fn depolarize(rho: &DensityMatrix, p: f64) -> DensityMatrix {
    let d = rho.dim();
    let m = rho.matrix().scale(1.0 - p) + ComplexMatrix::identity(d).scale(p / d as f64);
    DensityMatrix::from_matrix_unchecked(m)
}

/// Radius r goes to lambda*r*(1-r); the direction is unchanged and the
/// observed outcome plays no role. The center r = 0 is an exact fixed point.
fn logistic_post(lambda: f64, rho: &DensityMatrix) -> Result<DensityMatrix> {
    let v = density_to_bloch(rho)?;
    let r = v.radius();
    if r == 0.0 {
        return Ok(DensityMatrix::maximally_mixed(2));
    }
    // New radius lambda*r*(1-r) <= lambda/4 <= 1 keeps the point in the ball.
    Ok(bloch_to_density(&v.scale(lambda * (1.0 - r))))
}
