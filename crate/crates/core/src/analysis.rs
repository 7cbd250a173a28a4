//! Executable convexity diagnostics.
//!
//! An outcome probability function (OPF) maps states to [0, 1]. For the
//! standard update rule every observable statistic of this kind is
//! convex-linear and therefore expressible as tr(rho E) for a single effect
//! E; the tools here check linearity on random ensembles, reconstruct E by
//! exact inversion on a probe basis, fit one effect per outcome pair of a
//! two-stage experiment, and measure how well two decompositions of the same
//! mixed state can be told apart. Nonlinear update rules fail these checks
//! with finite, reproducible gaps.

use std::sync::Arc;

use crate::batch;
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::measurement::{born_probability, Effect};
use crate::sample;
use crate::sequential::{joint_distribution, second_stage_marginal, TwoStageExperiment};
use crate::state::{bloch_to_density, BlochVector, DensityMatrix, EnsembleDecomposition};
use crate::tol;

/// Fixed evaluation set for held-out residuals: same states on every run so
/// reported residuals are reproducible without carrying a seed around.
const HOLDOUT_SEED: u64 = 1_000_003;
const HOLDOUT_STATES: usize = 100;

/// Outcome probability function: a labeled, thread-safe evaluator from
/// states to the unit interval.
#[derive(Clone)]
pub struct Opf {
    label: String,
    eval: Arc<dyn Fn(&DensityMatrix) -> Result<f64> + Send + Sync>,
}

impl std::fmt::Debug for Opf {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Opf").field("label", &self.label).finish()
    }
}

impl Opf {
    pub fn from_fn(
        label: impl Into<String>,
        eval: impl Fn(&DensityMatrix) -> Result<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.into(),
            eval: Arc::new(eval),
        }
    }

    /// rho -> tr(rho q): the convex-linear reference family.
    pub fn born(q: Effect) -> Self {
        Self::from_fn("born", move |rho| born_probability(&q, rho))
    }

    /// Probability of one second-stage outcome of a two-stage experiment,
    /// as a function of the initial state.
    pub fn second_stage_marginal(x: TwoStageExperiment, outcome: &str) -> Self {
        let outcome = outcome.to_string();
        Self::from_fn(format!("marginal[{outcome}]"), move |rho| {
            second_stage_marginal(&x, rho)?.probability(&outcome)
        })
    }

    /// rho -> tr(rho^2): smooth, bounded, strictly convex; never linear.
    pub fn purity() -> Self {
        Self::from_fn("purity", |rho| Ok(rho.purity()))
    }

    pub fn constant(value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::ParameterOutOfRange {
                name: "value",
                value,
            });
        }
        Ok(Self::from_fn(format!("const({value})"), move |_| Ok(value)))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn evaluate(&self, rho: &DensityMatrix) -> Result<f64> {
        (self.eval)(rho)
    }
}

/// p*f + (1-p)*g pointwise; OPFs are closed under this operation.
pub fn mix_opfs(p: f64, f: &Opf, g: &Opf) -> Result<Opf> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::ParameterOutOfRange { name: "p", value: p });
    }
    let (f, g) = (f.clone(), g.clone());
    Ok(Opf::from_fn(
        format!("mix({p}, {}, {})", f.label(), g.label()),
        move |rho| Ok(p * f.evaluate(rho)? + (1.0 - p) * g.evaluate(rho)?),
    ))
}

/// Outcome of a convex-linearity test.
#[derive(Debug, Clone)]
pub struct LinearityReport {
    pub passed: bool,
    pub worst_gap: f64,
    /// The ensemble realizing the worst gap, present only on failure.
    pub witness: Option<EnsembleDecomposition>,
}

/// The canonical failure witness: an even mixture of the center and the
/// z+ pole. Including it in every trial set makes nonlinearity failures
/// reproducible without knowing the seed.
pub fn canonical_witness() -> EnsembleDecomposition {
    EnsembleDecomposition::new(vec![
        (0.5, DensityMatrix::maximally_mixed(2)),
        (0.5, bloch_to_density(&BlochVector::Z_PLUS)),
    ])
    .expect("two equal weights")
}

fn linearity_gap(f: &Opf, e: &EnsembleDecomposition) -> Result<f64> {
    let mixed_value = f.evaluate(&e.mix())?;
    let mut averaged = 0.0;
    for (weight, state) in e.members() {
        averaged += weight * f.evaluate(state)?;
    }
    Ok((mixed_value - averaged).abs())
}

/// Compares f(mix) with the member-weighted average of f on the canonical
/// witness plus `trials` random ensembles. Trials evaluate concurrently;
/// the verdict is deterministic in (seed, trials).
pub fn convex_linearity_check(
    f: &Opf,
    trials: usize,
    seed: u64,
    tolerance: f64,
) -> Result<LinearityReport> {
    if trials == 0 {
        return Err(Error::ParameterOutOfRange {
            name: "trials",
            value: 0.0,
        });
    }
    let results = batch::try_map_indexed(trials + 1, |i| {
        let ensemble = if i == 0 {
            canonical_witness()
        } else {
            sample::random_ensemble(&mut sample::rng(seed, i as u64))
        };
        let gap = linearity_gap(f, &ensemble)?;
        Ok((gap, ensemble))
    })?;
    let (mut worst_gap, mut witness) = (f64::NEG_INFINITY, None);
    for (gap, ensemble) in results {
        if gap > worst_gap {
            worst_gap = gap;
            witness = Some(ensemble);
        }
    }
    let passed = worst_gap <= tolerance;
    Ok(LinearityReport {
        passed,
        worst_gap,
        witness: if passed { None } else { witness },
    })
}

/// The four probe states {I/2, (I+sigma_k)/2}: affinely independent, so an
/// affine function of the state is determined exactly by its values here.
fn probe_basis() -> [DensityMatrix; 4] {
    [
        DensityMatrix::maximally_mixed(2),
        bloch_to_density(&BlochVector::X_PLUS),
        bloch_to_density(&BlochVector::Y_PLUS),
        bloch_to_density(&BlochVector::Z_PLUS),
    ]
}

/// Solves tr(rho E) = value on the probe basis in closed form:
/// E = v0 I + sum_k (vk - v0) sigma_k.
fn effect_from_probe_values(values: [f64; 4]) -> ComplexMatrix {
    let mut e = ComplexMatrix::identity(2).scale(values[0]);
    for k in 1..4 {
        let sigma = ComplexMatrix::pauli(k).expect("index in range");
        e = e + sigma.scale(values[k] - values[0]);
    }
    e
}

fn holdout_states() -> Result<Vec<DensityMatrix>> {
    batch::try_map_indexed(HOLDOUT_STATES, |k| {
        Ok(sample::random_mixed(&mut sample::rng(HOLDOUT_SEED, k as u64)))
    })
}

/// Result of reconstructing a single effect from an OPF.
#[derive(Debug, Clone)]
pub struct EffectFit {
    /// The exact probe-basis solution, returned even when out of bounds.
    pub candidate: ComplexMatrix,
    /// The candidate as a validated effect, when it is one.
    pub effect: Option<Effect>,
    /// max |f(rho) - tr(rho candidate)| over the held-out states.
    pub residual: f64,
}

/// Reconstructs the effect E with f = tr(. E), if one exists: exact solve
/// on the probe basis, then a held-out residual that is zero (to rounding)
/// precisely when f really is convex-linear.
pub fn fit_effect_from_opf(f: &Opf) -> Result<EffectFit> {
    let probes = probe_basis();
    let mut values = [0.0; 4];
    for (slot, probe) in values.iter_mut().zip(&probes) {
        *slot = f.evaluate(probe)?;
    }
    let candidate = effect_from_probe_values(values);

    let states = holdout_states()?;
    let residuals = batch::try_map_indexed(states.len(), |k| {
        let rho = &states[k];
        let predicted = rho.matrix().trace_product(&candidate)?.re;
        Ok((f.evaluate(rho)? - predicted).abs())
    })?;
    let residual = residuals.into_iter().fold(0.0, f64::max);

    let effect = Effect::new(candidate.clone()).ok();
    Ok(EffectFit {
        candidate,
        effect,
        residual,
    })
}

/// One fitted operator per (first, second) outcome pair of a two-stage
/// experiment, with the residual and completeness defect that say whether
/// the pairs form a genuine POVM reproducing the joint statistics.
#[derive(Debug, Clone)]
pub struct HeraldedPovmFit {
    candidates: Vec<((String, String), ComplexMatrix)>,
    pub fit_residual: f64,
    pub completeness_defect: f64,
}

impl HeraldedPovmFit {
    pub fn candidates(&self) -> &[((String, String), ComplexMatrix)] {
        &self.candidates
    }

    pub fn candidate_for(&self, first: &str, second: &str) -> Result<&ComplexMatrix> {
        self.candidates
            .iter()
            .find(|((f, s), _)| f == first && s == second)
            .map(|(_, m)| m)
            .ok_or_else(|| Error::UnknownLabel {
                label: format!("({first}, {second})"),
            })
    }
}

/// Fits H(i,j) with tr(H rho) = P(i,j | rho) by the probe-basis solve, per
/// outcome pair. When the rule's total map is linear in rho the fit is
/// exact and the H's sum to the identity; a nonlinear rule leaves a finite
/// held-out residual no operator set can remove.
pub fn fit_heralded_povm(x: &TwoStageExperiment) -> Result<HeraldedPovmFit> {
    if x.dim() != 2 {
        return Err(Error::UnsupportedDimension {
            dim: x.dim(),
            expected: 2,
        });
    }
    let probes = probe_basis();
    let mut probe_joints = Vec::with_capacity(probes.len());
    for probe in &probes {
        probe_joints.push(joint_distribution(x, probe)?);
    }

    let mut candidates = Vec::new();
    let mut total = ComplexMatrix::zeros(2);
    for first in x.first().labels() {
        for second in x.second().labels() {
            let mut values = [0.0; 4];
            for (slot, joint) in values.iter_mut().zip(&probe_joints) {
                *slot = joint.probability(first, second)?;
            }
            let candidate = effect_from_probe_values(values);
            total = total + &candidate;
            candidates.push(((first.clone(), second.clone()), candidate));
        }
    }
    let completeness_defect = total.max_abs_diff(&ComplexMatrix::identity(2));

    let states = holdout_states()?;
    let residuals = batch::try_map_indexed(states.len(), |k| {
        let rho = &states[k];
        let joint = joint_distribution(x, rho)?;
        let mut worst = 0.0_f64;
        for ((first, second), candidate) in &candidates {
            let predicted = rho.matrix().trace_product(candidate)?.re;
            let actual = joint.probability(first, second)?;
            worst = worst.max((actual - predicted).abs());
        }
        Ok(worst)
    })?;
    let fit_residual = residuals.into_iter().fold(0.0, f64::max);

    Ok(HeraldedPovmFit {
        candidates,
        fit_residual,
        completeness_defect,
    })
}

/// Member-weighted joint distribution: each ensemble member runs the
/// experiment separately and the outcomes pool with the member weights.
/// This is the ensemble reading of the statistics, as opposed to running
/// the experiment on the averaged state.
fn ensemble_joint(
    x: &TwoStageExperiment,
    e: &EnsembleDecomposition,
) -> Result<Vec<((String, String), f64)>> {
    let mut acc: Option<Vec<((String, String), f64)>> = None;
    for (weight, state) in e.members() {
        let joint = joint_distribution(x, state)?;
        match &mut acc {
            None => {
                acc = Some(
                    joint
                        .entries()
                        .iter()
                        .map(|(k, p)| (k.clone(), weight * p))
                        .collect(),
                );
            }
            Some(entries) => {
                for (slot, (key, p)) in entries.iter_mut().zip(joint.entries()) {
                    debug_assert_eq!(&slot.0, key);
                    slot.1 += weight * p;
                }
            }
        }
    }
    Ok(acc.expect("ensembles are non-empty"))
}

/// Total-variation distance between the member-weighted joint statistics of
/// two decompositions of the same average state. Zero for any linear rule;
/// a nonzero value is single-shot distinguishing advantage between
/// preparations that standard theory says are identical.
pub fn ensemble_discrimination_gap(
    a: &EnsembleDecomposition,
    b: &EnsembleDecomposition,
    x: &TwoStageExperiment,
) -> Result<f64> {
    let difference = a.mix().matrix().max_abs_diff(b.mix().matrix());
    if difference > tol::ENSEMBLE_MATCH {
        return Err(Error::EnsembleAverageMismatch { difference });
    }
    let ja = ensemble_joint(x, a)?;
    let jb = ensemble_joint(x, b)?;
    let mut tv = 0.0;
    for ((key_a, pa), (key_b, pb)) in ja.iter().zip(&jb) {
        debug_assert_eq!(key_a, key_b);
        tv += (pa - pb).abs();
    }
    Ok(0.5 * tv)
}
