//! Executes loaded scenarios: one CSV per requested analysis for `run`,
//! one CSV per sweep for `sweep`, plus a one-line stdout summary per
//! artifact. All numeric CSV cells carry full f64 precision, so repeated
//! runs with the same seed are byte-identical.

use std::fs;
use std::path::{Path, PathBuf};

use qmlab_core::analysis::{
    convex_linearity_check, ensemble_discrimination_gap, fit_effect_from_opf, fit_heralded_povm,
    Opf,
};
use qmlab_core::batch;
use qmlab_core::matrix::ComplexMatrix;
use qmlab_core::measurement::Povm;
use qmlab_core::sequential::{joint_distribution, second_stage_marginal, TwoStageExperiment};
use qmlab_core::state::{DensityMatrix, EnsembleDecomposition};
use qmlab_core::temporal::{build_pdm, negativity};

use crate::error::CliError;
use crate::scenario::{AnalysisKind, Scenario, SweepParameter};
use crate::table::{emit_csv, Cell, ResultTable};

pub struct RunOptions {
    pub out_dir: PathBuf,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn io_err(context: &str, path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{context} {}: {e}", path.display()))
}

pub fn load_scenario(path: &Path, opts: &RunOptions) -> Result<Scenario, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err("cannot read", path, e))?;
    let mut scenario: Scenario = serde_json::from_str(&text)?;
    if let Some(seed) = opts.seed {
        scenario.seed = seed;
    }
    if let Some(tol) = opts.tol {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(invalid(format!("tolerance must be positive, got {tol}")));
        }
        scenario.tolerance = tol;
    }
    scenario.validate_name()?;
    Ok(scenario)
}

fn write_table(
    table: &ResultTable,
    opts: &RunOptions,
    file_name: &str,
) -> Result<PathBuf, CliError> {
    fs::create_dir_all(&opts.out_dir)
        .map_err(|e| io_err("cannot create output directory", &opts.out_dir, e))?;
    let path = opts.out_dir.join(file_name);
    emit_csv(table, &path).map_err(|e| io_err("cannot write", &path, e))?;
    Ok(path)
}

fn matrix_headers(prefix: &str, dim: usize) -> Vec<String> {
    let mut headers = Vec::with_capacity(2 * dim * dim);
    for r in 0..dim {
        for c in 0..dim {
            headers.push(format!("{prefix}{r}{c}_re"));
            headers.push(format!("{prefix}{r}{c}_im"));
        }
    }
    headers
}

fn push_matrix_cells(row: &mut Vec<Cell>, m: &ComplexMatrix) {
    for r in 0..m.dim() {
        for c in 0..m.dim() {
            let z = m.entry(r, c);
            row.push(Cell::Float(z.re));
            row.push(Cell::Float(z.im));
        }
    }
}

/// The scalar an experiment assigns to a state: the second-stage marginal
/// probability of the second POVM's first outcome. Every fitting analysis
/// probes this same function.
fn experiment_opf(x: &TwoStageExperiment) -> Opf {
    let outcome = x.second().labels()[0].clone();
    Opf::second_stage_marginal(x.clone(), &outcome)
}

pub fn run_scenario_file(path: &Path, opts: &RunOptions) -> Result<(), CliError> {
    let scenario = load_scenario(path, opts)?;
    if scenario.analyses.is_empty() {
        return Err(invalid(
            "scenario requests no analyses; add at least one to `analyses`",
        ));
    }

    let rho = scenario.initial_state.resolve()?;
    let rule = scenario.rule.resolve()?;
    let experiment = if scenario.analyses.iter().any(AnalysisKind::needs_stages) {
        let (first, second) = scenario.resolve_stages()?;
        Some(TwoStageExperiment::new(first, second, rule)?)
    } else {
        None
    };

    println!("scenario {} (seed {})", scenario.name, scenario.seed);
    for analysis in &scenario.analyses {
        let table = match analysis {
            AnalysisKind::Joint => joint_table(experiment.as_ref().unwrap(), &rho)?,
            AnalysisKind::Marginal => marginal_table(experiment.as_ref().unwrap(), &rho)?,
            AnalysisKind::Linearity => linearity_table(experiment.as_ref().unwrap(), &scenario)?,
            AnalysisKind::EffectFit => effect_fit_table(experiment.as_ref().unwrap())?,
            AnalysisKind::HeraldedFit => heralded_fit_table(experiment.as_ref().unwrap())?,
            AnalysisKind::Discrimination => {
                discrimination_table(experiment.as_ref().unwrap(), &scenario)?
            }
            AnalysisKind::Pdm => pdm_table(&rho, &scenario)?,
        };
        let file_name = format!("{}_{}.csv", scenario.name, analysis.name());
        let written = write_table(&table.rows, opts, &file_name)?;
        println!("  {}: {} -> {}", analysis.name(), table.summary, written.display());
    }
    Ok(())
}

/// A finished analysis: the CSV payload plus the headline for stdout.
struct AnalysisOutput {
    rows: ResultTable,
    summary: String,
}

fn joint_table(x: &TwoStageExperiment, rho: &DensityMatrix) -> Result<AnalysisOutput, CliError> {
    let joint = joint_distribution(x, rho)?;
    let mut table = ResultTable::new(["first", "second", "probability"]);
    for ((first, second), p) in joint.entries() {
        table.push_row(vec![
            Cell::Str(first.clone()),
            Cell::Str(second.clone()),
            Cell::Float(*p),
        ]);
    }
    Ok(AnalysisOutput {
        summary: format!("{} outcome pairs", joint.entries().len()),
        rows: table,
    })
}

fn marginal_table(x: &TwoStageExperiment, rho: &DensityMatrix) -> Result<AnalysisOutput, CliError> {
    let marginal = second_stage_marginal(x, rho)?;
    let mut table = ResultTable::new(["outcome", "probability"]);
    let mut parts = Vec::new();
    for (label, p) in marginal.entries() {
        table.push_row(vec![Cell::Str(label.clone()), Cell::Float(*p)]);
        parts.push(format!("{label}={p:.6}"));
    }
    Ok(AnalysisOutput {
        rows: table,
        summary: parts.join(", "),
    })
}

fn linearity_table(x: &TwoStageExperiment, scenario: &Scenario) -> Result<AnalysisOutput, CliError> {
    let opf = experiment_opf(x);
    let report = convex_linearity_check(&opf, scenario.trials, scenario.seed, scenario.tolerance)?;
    let mut table = ResultTable::new(["opf", "trials", "seed", "tolerance", "passed", "worst_gap"]);
    table.push_row(vec![
        Cell::Str(opf.label().to_string()),
        Cell::Int(scenario.trials as i64),
        Cell::Str(scenario.seed.to_string()),
        Cell::Float(scenario.tolerance),
        Cell::Bool(report.passed),
        Cell::Float(report.worst_gap),
    ]);
    Ok(AnalysisOutput {
        rows: table,
        summary: format!("passed={}, worst_gap={:.3e}", report.passed, report.worst_gap),
    })
}

fn effect_fit_table(x: &TwoStageExperiment) -> Result<AnalysisOutput, CliError> {
    let fit = fit_effect_from_opf(&experiment_opf(x))?;
    let mut headers = vec!["residual".to_string(), "is_valid_effect".to_string()];
    headers.extend(matrix_headers("e", fit.candidate.dim()));
    let mut table = ResultTable::new(headers);
    let mut row = vec![Cell::Float(fit.residual), Cell::Bool(fit.effect.is_some())];
    push_matrix_cells(&mut row, &fit.candidate);
    table.push_row(row);
    Ok(AnalysisOutput {
        rows: table,
        summary: format!(
            "residual={:.3e}, valid_effect={}",
            fit.residual,
            fit.effect.is_some()
        ),
    })
}

fn heralded_fit_table(x: &TwoStageExperiment) -> Result<AnalysisOutput, CliError> {
    let fit = fit_heralded_povm(x)?;
    let dim = x.dim();
    let mut headers = vec![
        "first".to_string(),
        "second".to_string(),
        "fit_residual".to_string(),
        "completeness_defect".to_string(),
    ];
    headers.extend(matrix_headers("h", dim));
    let mut table = ResultTable::new(headers);
    for ((first, second), candidate) in fit.candidates() {
        let mut row = vec![
            Cell::Str(first.clone()),
            Cell::Str(second.clone()),
            Cell::Float(fit.fit_residual),
            Cell::Float(fit.completeness_defect),
        ];
        push_matrix_cells(&mut row, candidate);
        table.push_row(row);
    }
    Ok(AnalysisOutput {
        rows: table,
        summary: format!(
            "residual={:.3e}, completeness_defect={:.3e}",
            fit.fit_residual, fit.completeness_defect
        ),
    })
}

fn discrimination_table(
    x: &TwoStageExperiment,
    scenario: &Scenario,
) -> Result<AnalysisOutput, CliError> {
    if !scenario.initial_state.is_mixture() {
        return Err(invalid(
            "discrimination compares a mixture against its average state; \
             give initial_state as a mixture",
        ));
    }
    let declared = scenario.initial_state.resolve_ensemble()?;
    let plain = EnsembleDecomposition::new(vec![(1.0, declared.mix())])?;
    let gap = ensemble_discrimination_gap(&plain, &declared, x)?;
    let mut table = ResultTable::new(["gap"]);
    table.push_row(vec![Cell::Float(gap)]);
    Ok(AnalysisOutput {
        rows: table,
        summary: format!("gap={gap:.6}"),
    })
}

fn pdm_table(rho: &DensityMatrix, scenario: &Scenario) -> Result<AnalysisOutput, CliError> {
    let channel = scenario.channel.resolve()?;
    let pdm = build_pdm(rho, &channel)?;
    let neg = negativity(&pdm);
    let mut headers = vec![
        "trace".to_string(),
        "min_eigenvalue".to_string(),
        "negativity".to_string(),
    ];
    for i in 0..pdm.eigenvalues().len() {
        headers.push(format!("eig_{i}"));
    }
    let mut table = ResultTable::new(headers);
    let mut row = vec![
        Cell::Float(pdm.matrix().trace().re),
        Cell::Float(pdm.min_eigenvalue()),
        Cell::Float(neg),
    ];
    row.extend(pdm.eigenvalues().iter().map(|&e| Cell::Float(e)));
    table.push_row(row);
    Ok(AnalysisOutput {
        rows: table,
        summary: format!(
            "min_eigenvalue={:.6}, negativity={:.6}",
            pdm.min_eigenvalue(),
            neg
        ),
    })
}

pub fn run_sweep_file(path: &Path, opts: &RunOptions) -> Result<(), CliError> {
    let scenario = load_scenario(path, opts)?;
    let sweep = scenario
        .sweep
        .clone()
        .ok_or_else(|| invalid("sweep subcommand needs a `sweep` block in the scenario"))?;
    let values = sweep.values()?;

    let (first, second) = scenario.resolve_stages()?;
    let labels = second.labels().to_vec();
    let rows = match sweep.parameter {
        SweepParameter::Weight => weight_sweep_rows(&scenario, &values, first, second)?,
        SweepParameter::Lambda => lambda_sweep_rows(&scenario, &values, first, second)?,
    };

    // Distance of the first marginal column from its best affine fit in
    // the swept parameter; a large residual means the response is curved.
    let ys: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    let residuals = affine_fit_residuals(&values, &ys);

    let mut headers = vec![sweep.parameter.name().to_string()];
    headers.extend(labels.iter().map(|l| format!("p[{l}]")));
    headers.push("linear_fit_residual".to_string());
    let mut table = ResultTable::new(headers);
    for (row, residual) in rows.iter().zip(&residuals) {
        let mut cells: Vec<Cell> = row.iter().map(|&v| Cell::Float(v)).collect();
        cells.push(Cell::Float(*residual));
        table.push_row(cells);
    }

    let file_name = format!("{}_sweep.csv", scenario.name);
    let written = write_table(&table, opts, &file_name)?;
    let max_residual = residuals.iter().fold(0.0f64, |a, &b| a.max(b));
    println!("scenario {} (seed {})", scenario.name, scenario.seed);
    println!(
        "  sweep {}: {} points, max linear_fit_residual={:.3e} -> {}",
        sweep.parameter.name(),
        values.len(),
        max_residual,
        written.display()
    );
    Ok(())
}

fn weight_sweep_rows(
    scenario: &Scenario,
    values: &[f64],
    first: Povm,
    second: Povm,
) -> Result<Vec<Vec<f64>>, CliError> {
    let declared = scenario.initial_state.resolve_ensemble().map_err(|_| {
        invalid("a weight sweep needs initial_state given as a two-member mixture")
    })?;
    if declared.members().len() != 2 {
        return Err(invalid(format!(
            "a weight sweep needs exactly two mixture members, got {}",
            declared.members().len()
        )));
    }
    let a = declared.members()[0].1.clone();
    let b = declared.members()[1].1.clone();
    let rule = scenario.rule.resolve()?;
    let x = TwoStageExperiment::new(first, second, rule)?;

    let rows = batch::try_map_indexed(values.len(), |i| {
        let w = values[i];
        let mixed = EnsembleDecomposition::new(vec![(w, a.clone()), (1.0 - w, b.clone())])?.mix();
        let marginal = second_stage_marginal(&x, &mixed)?;
        let mut row = vec![w];
        row.extend(marginal.entries().iter().map(|(_, p)| *p));
        Ok(row)
    })?;
    Ok(rows)
}

fn lambda_sweep_rows(
    scenario: &Scenario,
    values: &[f64],
    first: Povm,
    second: Povm,
) -> Result<Vec<Vec<f64>>, CliError> {
    use crate::scenario::RuleSpec;
    if !matches!(scenario.rule, RuleSpec::LogisticBloch { .. }) {
        return Err(invalid("a lambda sweep needs rule type logistic_bloch"));
    }
    let rho = scenario.initial_state.resolve()?;

    let rows = batch::try_map_indexed(values.len(), |i| {
        let lambda = values[i];
        let rule = qmlab_core::update::UpdateRule::logistic_bloch(lambda)?;
        let x = TwoStageExperiment::new(first.clone(), second.clone(), rule)?;
        let marginal = second_stage_marginal(&x, &rho)?;
        let mut row = vec![lambda];
        row.extend(marginal.entries().iter().map(|(_, p)| *p));
        Ok(row)
    })?;
    Ok(rows)
}

/// Per-point |y - (a + b x)| against the least-squares affine fit. With
/// fewer than two distinct x values the fit degenerates to the mean.
fn affine_fit_residuals(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    let (intercept, slope) = if denom.abs() < 1e-12 {
        (sy / n, 0.0)
    } else {
        let slope = (n * sxy - sx * sy) / denom;
        ((sy - slope * sx) / n, slope)
    };
    xs.iter()
        .zip(ys)
        .map(|(x, y)| (y - (intercept + slope * x)).abs())
        .collect()
}
