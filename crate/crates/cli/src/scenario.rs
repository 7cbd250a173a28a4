//! Declarative scenario files (JSON) and their resolution into library
//! objects. Everything a scenario can reference is listed in the named
//! state/POVM tables below; anything else must be written out as an
//! explicit matrix.

use num_complex::Complex64;
use serde::Deserialize;

use qmlab_core::matrix::ComplexMatrix;
use qmlab_core::measurement::{
    computational_basis_povm, x_basis_povm, y_basis_povm, Effect, Povm,
};
use qmlab_core::state::{
    bloch_to_density, validate_density, BlochVector, DensityMatrix, EnsembleDecomposition,
};
use qmlab_core::temporal::Channel;
use qmlab_core::update::{LudersRule, UpdateRule};

use crate::error::CliError;

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub initial_state: StateSpec,
    #[serde(default = "RuleSpec::default")]
    pub rule: RuleSpec,
    /// Exactly two POVMs: first and second stage.
    #[serde(default = "default_stages")]
    pub stages: Vec<StageSpec>,
    #[serde(default)]
    pub analyses: Vec<AnalysisKind>,
    /// Evolution between the two times of a pseudo-density-matrix analysis.
    #[serde(default)]
    pub channel: ChannelSpec,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub seed: u64,
    /// Random ensembles drawn by the linearity analysis.
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Gap above which the linearity analysis reports failure.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn default_stages() -> Vec<StageSpec> {
    vec![
        StageSpec::Named("computational".into()),
        StageSpec::Named("computational".into()),
    ]
}

fn default_trials() -> usize {
    200
}

fn default_tolerance() -> f64 {
    1e-10
}

impl Scenario {
    /// Name doubles as the output-file prefix, so keep it path-friendly.
    pub fn validate_name(&self) -> Result<(), CliError> {
        if self.name.is_empty() {
            return Err(invalid("scenario name must not be empty"));
        }
        if !self
            .name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
        {
            return Err(invalid(format!(
                "scenario name `{}` may only contain letters, digits, `-`, `_`, `.`",
                self.name
            )));
        }
        Ok(())
    }

    pub fn resolve_stages(&self) -> Result<(Povm, Povm), CliError> {
        if self.stages.len() != 2 {
            return Err(invalid(format!(
                "exactly two stages are required, got {}",
                self.stages.len()
            )));
        }
        Ok((self.stages[0].resolve()?, self.stages[1].resolve()?))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum StateSpec {
    /// One of: z+, z-, x+, x-, y+, y-, I/2.
    Named(String),
    Bloch { bloch: [f64; 3] },
    Mixture { mixture: Vec<MixtureMember> },
    /// Row-major complex entries as [re, im] pairs.
    Matrix { matrix: Vec<Vec<[f64; 2]>> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureMember {
    pub weight: f64,
    pub state: StateSpec,
}

fn named_bloch(name: &str) -> Option<BlochVector> {
    Some(match name {
        "z+" => BlochVector::Z_PLUS,
        "z-" => BlochVector::Z_MINUS,
        "x+" => BlochVector::X_PLUS,
        "x-" => BlochVector::X_MINUS,
        "y+" => BlochVector::Y_PLUS,
        "y-" => BlochVector::Y_MINUS,
        "I/2" => BlochVector::ZERO,
        _ => return None,
    })
}

fn parse_matrix(rows: &[Vec<[f64; 2]>]) -> Result<ComplexMatrix, CliError> {
    let data: Vec<Vec<Complex64>> = rows
        .iter()
        .map(|row| row.iter().map(|[re, im]| Complex64::new(*re, *im)).collect())
        .collect();
    Ok(ComplexMatrix::from_rows(&data)?)
}

impl StateSpec {
    pub fn resolve(&self) -> Result<DensityMatrix, CliError> {
        match self {
            StateSpec::Named(name) => named_bloch(name)
                .map(|v| bloch_to_density(&v))
                .ok_or_else(|| {
                    invalid(format!(
                        "unknown state `{name}`; known states: z+, z-, x+, x-, y+, y-, I/2"
                    ))
                }),
            StateSpec::Bloch { bloch } => {
                let v = BlochVector::new(bloch[0], bloch[1], bloch[2])?;
                Ok(bloch_to_density(&v))
            }
            StateSpec::Mixture { .. } => Ok(self.resolve_ensemble()?.mix()),
            StateSpec::Matrix { matrix } => Ok(validate_density(parse_matrix(matrix)?)?),
        }
    }

    /// The decomposition itself, for analyses that compare preparations.
    pub fn resolve_ensemble(&self) -> Result<EnsembleDecomposition, CliError> {
        match self {
            StateSpec::Mixture { mixture } => {
                let mut members = Vec::with_capacity(mixture.len());
                for member in mixture {
                    members.push((member.weight, member.state.resolve()?));
                }
                Ok(EnsembleDecomposition::new(members)?)
            }
            _ => Err(invalid(
                "this analysis needs an initial_state given as a mixture",
            )),
        }
    }

    pub fn is_mixture(&self) -> bool {
        matches!(self, StateSpec::Mixture { .. })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum RuleSpec {
    Lueders,
    LogisticBloch { lambda: f64 },
    ProbabilityDependent,
}

impl RuleSpec {
    fn default() -> Self {
        RuleSpec::Lueders
    }

    pub fn resolve(&self) -> Result<UpdateRule, CliError> {
        Ok(match self {
            RuleSpec::Lueders => UpdateRule::luders(),
            RuleSpec::LogisticBloch { lambda } => UpdateRule::logistic_bloch(*lambda)?,
            RuleSpec::ProbabilityDependent => {
                UpdateRule::probability_dependent(LudersRule::standard())
            }
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum StageSpec {
    /// One of: computational, x, y, trivial.
    Named(String),
    Explicit {
        effects: Vec<Vec<Vec<[f64; 2]>>>,
        labels: Vec<String>,
    },
}

impl StageSpec {
    pub fn resolve(&self) -> Result<Povm, CliError> {
        match self {
            StageSpec::Named(name) => match name.as_str() {
                "computational" => Ok(computational_basis_povm()),
                "x" => Ok(x_basis_povm()),
                "y" => Ok(y_basis_povm()),
                "trivial" => Ok(Povm::trivial(2)),
                _ => Err(invalid(format!(
                    "unknown POVM `{name}`; known POVMs: computational, x, y, trivial"
                ))),
            },
            StageSpec::Explicit { effects, labels } => {
                let mut resolved = Vec::with_capacity(effects.len());
                for rows in effects {
                    resolved.push(Effect::new(parse_matrix(rows)?)?);
                }
                Ok(Povm::new(resolved, labels.clone())?)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalysisKind {
    Joint,
    Marginal,
    Linearity,
    EffectFit,
    HeraldedFit,
    Discrimination,
    Pdm,
}

impl AnalysisKind {
    pub fn name(&self) -> &'static str {
        match self {
            AnalysisKind::Joint => "joint",
            AnalysisKind::Marginal => "marginal",
            AnalysisKind::Linearity => "linearity",
            AnalysisKind::EffectFit => "effect_fit",
            AnalysisKind::HeraldedFit => "heralded_fit",
            AnalysisKind::Discrimination => "discrimination",
            AnalysisKind::Pdm => "pdm",
        }
    }

    pub fn needs_stages(&self) -> bool {
        !matches!(self, AnalysisKind::Pdm)
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelSpec {
    #[default]
    Identity,
    Depolarizing {
        strength: f64,
    },
    FullyDepolarizing,
    Unitary {
        matrix: Vec<Vec<[f64; 2]>>,
    },
}

impl ChannelSpec {
    pub fn resolve(&self) -> Result<Channel, CliError> {
        Ok(match self {
            ChannelSpec::Identity => Channel::identity(2),
            ChannelSpec::Depolarizing { strength } => Channel::depolarizing(*strength)?,
            ChannelSpec::FullyDepolarizing => Channel::fully_depolarizing(),
            ChannelSpec::Unitary { matrix } => Channel::unitary(parse_matrix(matrix)?)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    /// Weight of the first mixture member; the initial state must be a
    /// two-member mixture.
    Weight,
    /// Logistic parameter; the rule must be logistic_bloch.
    Lambda,
}

impl SweepParameter {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParameter::Weight => "weight",
            SweepParameter::Lambda => "lambda",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl SweepSpec {
    /// Grid points from start to stop inclusive; the final point is forced
    /// onto stop exactly so endpoints never drift.
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        if !(self.start.is_finite() && self.stop.is_finite() && self.step.is_finite()) {
            return Err(invalid("sweep bounds must be finite"));
        }
        if self.step <= 0.0 {
            return Err(invalid(format!("sweep step must be positive, got {}", self.step)));
        }
        if self.stop < self.start {
            return Err(invalid(format!(
                "sweep stop {} is below start {}",
                self.stop, self.start
            )));
        }
        let intervals = ((self.stop - self.start) / self.step).round().max(1.0) as usize;
        Ok((0..=intervals)
            .map(|i| {
                if i == intervals {
                    self.stop
                } else {
                    self.start + i as f64 * self.step
                }
            })
            .collect())
    }
}
