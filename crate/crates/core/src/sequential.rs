//! Two measurement stages composed under a state-update rule, with joint,
//! marginal, and conditional statistics.
//!
//! The joint probability of (first outcome i, second outcome j) is always
//! the product P(j | post-state of i) * P(i), whatever the rule. For the
//! standard rule this collapses to a fixed two-stage POVM; for nonlinear
//! rules it does not, which is what the analysis module detects.

use crate::error::{Error, Result};
use crate::measurement::{born_probability, outcome_distribution, OutcomeDistribution, Povm};
use crate::state::DensityMatrix;
use crate::tol;
use crate::update::{apply_update, UpdateRule};

/// A first-stage POVM, a second-stage POVM, and the rule that carries the
/// state between them.
#[derive(Debug, Clone)]
pub struct TwoStageExperiment {
    first: Povm,
    second: Povm,
    rule: UpdateRule,
}

impl TwoStageExperiment {
    pub fn new(first: Povm, second: Povm, rule: UpdateRule) -> Result<Self> {
        if first.dim() != second.dim() {
            return Err(Error::DimensionMismatch {
                left: first.dim(),
                right: second.dim(),
            });
        }
        Ok(Self {
            first,
            second,
            rule,
        })
    }

    pub fn first(&self) -> &Povm {
        &self.first
    }

    pub fn second(&self) -> &Povm {
        &self.second
    }

    pub fn rule(&self) -> &UpdateRule {
        &self.rule
    }

    pub fn dim(&self) -> usize {
        self.first.dim()
    }
}

/// Probabilities keyed by (first label, second label), in stage order.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    entries: Vec<((String, String), f64)>,
}

impl JointDistribution {
    pub fn new(entries: Vec<((String, String), f64)>) -> Result<Self> {
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

    pub fn entries(&self) -> &[((String, String), f64)] {
        &self.entries
    }

    pub fn probability(&self, first: &str, second: &str) -> Result<f64> {
        self.entries
            .iter()
            .find(|((f, s), _)| f == first && s == second)
            .map(|(_, p)| *p)
            .ok_or_else(|| Error::UnknownLabel {
                label: format!("({first}, {second})"),
            })
    }
}

/// P(i, j) = P(j | i) P(i), with P(j | i) read off the rule's post-state.
/// First outcomes of zero probability contribute an all-zero row: the
/// conditional is undefined there but the joint mass is zero regardless.
pub fn joint_distribution(
    x: &TwoStageExperiment,
    rho: &DensityMatrix,
) -> Result<JointDistribution> {
    if x.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            left: x.dim(),
            right: rho.dim(),
        });
    }
    let mut entries = Vec::with_capacity(x.first().len() * x.second().len());
    for (f_effect, f_label) in x.first().effects().iter().zip(x.first().labels()) {
        let p_first = born_probability(f_effect, rho)?;
        if p_first <= 0.0 {
            for s_label in x.second().labels() {
                entries.push(((f_label.clone(), s_label.clone()), 0.0));
            }
            continue;
        }
        let outcome = apply_update(x.rule(), f_effect, rho)?;
        for (s_effect, s_label) in x.second().effects().iter().zip(x.second().labels()) {
            let p_second = born_probability(s_effect, &outcome.post_state)?;
            entries.push(((f_label.clone(), s_label.clone()), p_first * p_second));
        }
    }
    JointDistribution::new(entries)
}

/// Second-stage outcome probabilities with the first stage summed out.
pub fn second_stage_marginal(
    x: &TwoStageExperiment,
    rho: &DensityMatrix,
) -> Result<OutcomeDistribution> {
    let joint = joint_distribution(x, rho)?;
    let mut entries: Vec<(String, f64)> = x
        .second()
        .labels()
        .iter()
        .map(|l| (l.clone(), 0.0))
        .collect();
    for ((_, s_label), p) in joint.entries() {
        let slot = entries
            .iter_mut()
            .find(|(l, _)| l == s_label)
            .expect("joint labels come from the second POVM");
        slot.1 += p;
    }
    OutcomeDistribution::new(entries)
}

/// Second-stage distribution given the first outcome. Errors when the
/// conditioning outcome has zero probability.
pub fn conditional_distribution(
    x: &TwoStageExperiment,
    rho: &DensityMatrix,
    first_label: &str,
) -> Result<OutcomeDistribution> {
    let effect = x.first().effect_for(first_label)?;
    let outcome = apply_update(x.rule(), effect, rho)?;
    outcome_distribution(x.second(), &outcome.post_state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::computational_basis_povm;
    use crate::state::{bloch_to_density, BlochVector};
    use approx::assert_abs_diff_eq;

    fn comp_comp(rule: UpdateRule) -> TwoStageExperiment {
        TwoStageExperiment::new(computational_basis_povm(), computational_basis_povm(), rule)
            .unwrap()
    }

    #[test]
    fn luders_repeats_projective_outcomes() {
        let x = comp_comp(UpdateRule::luders());
        let joint = joint_distribution(&x, &DensityMatrix::maximally_mixed(2)).unwrap();
        assert_abs_diff_eq!(joint.probability("z+", "z+").unwrap(), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(joint.probability("z-", "z-").unwrap(), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(joint.probability("z+", "z-").unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(joint.probability("z-", "z+").unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn logistic_joint_on_half_radius_state() {
        let x = comp_comp(UpdateRule::logistic_bloch(4.0).unwrap());
        let rho = bloch_to_density(&BlochVector::new(0.0, 0.0, 0.5).unwrap());
        let joint = joint_distribution(&x, &rho).unwrap();
        // Both branches land on the pure z+ state, so the second outcome is
        // always z+; only the first-stage Born weights differ.
        assert_abs_diff_eq!(joint.probability("z+", "z+").unwrap(), 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(joint.probability("z-", "z+").unwrap(), 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(joint.probability("z+", "z-").unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(joint.probability("z-", "z-").unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn luders_marginal_preserves_z_statistics() {
        let x = comp_comp(UpdateRule::luders());
        let w = 0.3;
        let rho = bloch_to_density(&BlochVector::new(0.0, 0.0, w).unwrap());
        let marginal = second_stage_marginal(&x, &rho).unwrap();
        assert_abs_diff_eq!(
            marginal.probability("z+").unwrap(),
            (1.0 + w) / 2.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            marginal.probability("z-").unwrap(),
            (1.0 - w) / 2.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn logistic_marginal_hits_the_fixed_points() {
        let x = comp_comp(UpdateRule::logistic_bloch(4.0).unwrap());

        let half = bloch_to_density(&BlochVector::new(0.0, 0.0, 0.5).unwrap());
        let marginal = second_stage_marginal(&x, &half).unwrap();
        assert_abs_diff_eq!(marginal.probability("z+").unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(marginal.probability("z-").unwrap(), 0.0, epsilon = 1e-12);

        let center = DensityMatrix::maximally_mixed(2);
        let marginal = second_stage_marginal(&x, &center).unwrap();
        assert_abs_diff_eq!(marginal.probability("z+").unwrap(), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(marginal.probability("z-").unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn lambda_zero_marginal_is_uniform_from_any_state() {
        let x = comp_comp(UpdateRule::logistic_bloch(0.0).unwrap());
        for v in [
            BlochVector::Z_PLUS,
            BlochVector::new(0.1, -0.7, 0.2).unwrap(),
        ] {
            let marginal = second_stage_marginal(&x, &bloch_to_density(&v)).unwrap();
            assert_abs_diff_eq!(marginal.probability("z+").unwrap(), 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn conditionals_collapse_as_expected() {
        let x = comp_comp(UpdateRule::luders());
        let given_z_plus =
            conditional_distribution(&x, &DensityMatrix::maximally_mixed(2), "z+").unwrap();
        assert_abs_diff_eq!(given_z_plus.probability("z+").unwrap(), 1.0, epsilon = 1e-12);

        // Outcome-independent rule: conditioning on z- still predicts z+.
        let x = comp_comp(UpdateRule::logistic_bloch(4.0).unwrap());
        let rho = bloch_to_density(&BlochVector::new(0.0, 0.0, 0.5).unwrap());
        let given_z_minus = conditional_distribution(&x, &rho, "z-").unwrap();
        assert_abs_diff_eq!(given_z_minus.probability("z+").unwrap(), 1.0, epsilon = 1e-12);

        // Trivial second stage is certain.
        let x = TwoStageExperiment::new(
            computational_basis_povm(),
            Povm::trivial(2),
            UpdateRule::luders(),
        )
        .unwrap();
        let dist = conditional_distribution(&x, &rho, "z+").unwrap();
        assert_abs_diff_eq!(dist.probability("all").unwrap(), 1.0);
    }

    #[test]
    fn conditioning_on_zero_probability_outcome_fails() {
        let x = comp_comp(UpdateRule::luders());
        let pure = bloch_to_density(&BlochVector::Z_PLUS);
        assert!(matches!(
            conditional_distribution(&x, &pure, "z-"),
            Err(Error::ZeroProbabilityOutcome)
        ));
        assert!(conditional_distribution(&x, &pure, "nope").is_err());
    }

    #[test]
    fn zero_probability_first_outcomes_leave_zero_rows() {
        let x = comp_comp(UpdateRule::luders());
        let pure = bloch_to_density(&BlochVector::Z_PLUS);
        let joint = joint_distribution(&x, &pure).unwrap();
        assert_abs_diff_eq!(joint.probability("z-", "z+").unwrap(), 0.0);
        assert_abs_diff_eq!(joint.probability("z-", "z-").unwrap(), 0.0);
        let total: f64 = joint.entries().iter().map(|(_, p)| p).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn chain_rule_holds_where_defined() {
        for rule in [
            UpdateRule::luders(),
            UpdateRule::logistic_bloch(3.0).unwrap(),
        ] {
            let x = comp_comp(rule);
            let rho = bloch_to_density(&BlochVector::new(0.2, 0.3, -0.1).unwrap());
            let joint = joint_distribution(&x, &rho).unwrap();
            for f_label in ["z+", "z-"] {
                let p_first =
                    born_probability(x.first().effect_for(f_label).unwrap(), &rho).unwrap();
                let conditional = conditional_distribution(&x, &rho, f_label).unwrap();
                for s_label in ["z+", "z-"] {
                    let chained = conditional.probability(s_label).unwrap() * p_first;
                    assert_abs_diff_eq!(
                        joint.probability(f_label, s_label).unwrap(),
                        chained,
                        epsilon = 1e-12
                    );
                }
            }
        }
    }
}
