//! Monte-Carlo evaluation of the NPPR and PPR estimators over scenario grids.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bootstrap::{percentile_bootstrap, BootstrapConfig};
use crate::error::Result;
use crate::estimator::{self, VarianceScale};
use crate::parametric::fit_ppr;
use crate::rng::{derive_seed, Domain};
use crate::sim::{simulate_dataset, ModelKind, Scenario, REFERENCE_EFFECTS};

/// PPR estimates with `|-log RR| > 3` are treated as numerical failures.
pub const PPR_EXCLUSION_THRESHOLD: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub n_reps: usize,
    pub with_coverage: bool,
    /// Resample count and level for coverage runs; the seed is derived per
    /// replicate from the scenario seed.
    pub bootstrap: BootstrapConfig,
    /// Fit the PPR competitor. It is only ever fitted to PR (EU) scenarios.
    pub with_ppr: bool,
    pub ppr_exclusion_threshold: f64,
    /// NPPR weighting, applied to point estimates and bootstrap resamples.
    #[serde(default)]
    pub variance_scale: VarianceScale,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            n_reps: 1000,
            with_coverage: false,
            bootstrap: BootstrapConfig::default(),
            with_ppr: true,
            ppr_exclusion_threshold: PPR_EXCLUSION_THRESHOLD,
            variance_scale: VarianceScale::Survival,
        }
    }
}

/// Per-replicate outcome; `None` estimates mark failures or exclusions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicateOutcome {
    pub nppr: Option<f64>,
    pub nppr_covered: Option<bool>,
    pub ppr: Option<f64>,
    pub ppr_covered: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub scenario: Scenario,
    pub n_runs: usize,
    pub n_nppr_failed: usize,
    /// Runs whose PPR fit did not converge or exceeded the exclusion threshold.
    pub n_ppr_excluded: usize,
    pub ppr_fitted: bool,
    pub bias_nppr: Option<f64>,
    pub mse_nppr: Option<f64>,
    pub bias_ppr: Option<f64>,
    pub mse_ppr: Option<f64>,
    pub coverage_nppr: Option<f64>,
    pub coverage_ppr: Option<f64>,
    /// Runs contributing a bootstrap interval to `coverage_nppr`.
    pub n_coverage_nppr: usize,
    pub n_coverage_ppr: usize,
}

/// One replicate: simulate, estimate, optionally bootstrap and fit PPR.
pub fn run_replicate(scenario: &Scenario, replicate: u64, config: &StudyConfig) -> Result<ReplicateOutcome> {
    let data = simulate_dataset(scenario, replicate)?;
    let truth = scenario.effect_beta;

    let nppr = estimator::estimate_with(&data, config.variance_scale).ok().map(|e| e.beta);
    let nppr_covered = match nppr {
        Some(_) if config.with_coverage => {
            let boot = BootstrapConfig {
                seed: derive_seed(scenario.seed, Domain::StudyBootstrap, replicate),
                variance_scale: config.variance_scale,
                ..config.bootstrap
            };
            percentile_bootstrap(&data, &boot).ok().map(|r| r.beta.contains(truth))
        }
        _ => None,
    };

    let (mut ppr, mut ppr_covered) = (None, None);
    if config.with_ppr && scenario.model.kind() == ModelKind::PprEu {
        let fit = fit_ppr(&data);
        if fit.converged && fit.neg_log_rr.abs() <= config.ppr_exclusion_threshold {
            ppr = Some(fit.neg_log_rr);
            if config.with_coverage {
                ppr_covered = fit.ci_neg_log_rr.map(|ci| ci.contains(truth));
            }
        }
    }
    Ok(ReplicateOutcome { nppr, nppr_covered, ppr, ppr_covered })
}

/// Bias and MSE of `estimates` around `truth`. The MSE is assembled as
/// `bias^2 + variance`, which keeps `mse >= bias^2` in floating point.
pub fn bias_mse(estimates: &[f64], truth: f64) -> Option<(f64, f64)> {
    if estimates.is_empty() {
        return None;
    }
    let n = estimates.len() as f64;
    let bias = estimates.iter().map(|e| e - truth).sum::<f64>() / n;
    let variance = estimates.iter().map(|e| (e - truth - bias).powi(2)).sum::<f64>() / n;
    Some((bias, bias * bias + variance))
}

fn coverage(flags: impl Iterator<Item = Option<bool>>) -> (Option<f64>, usize) {
    let (mut hits, mut total) = (0usize, 0usize);
    for covered in flags.flatten() {
        total += 1;
        hits += usize::from(covered);
    }
    ((total > 0).then(|| hits as f64 / total as f64), total)
}

/// Aggregates replicate outcomes in replicate order.
pub fn aggregate(scenario: &Scenario, outcomes: &[ReplicateOutcome], config: &StudyConfig) -> ScenarioResult {
    let truth = scenario.effect_beta;
    let nppr: Vec<f64> = outcomes.iter().filter_map(|o| o.nppr).collect();
    let ppr: Vec<f64> = outcomes.iter().filter_map(|o| o.ppr).collect();
    let ppr_fitted = config.with_ppr && scenario.model.kind() == ModelKind::PprEu;
    let (bias_nppr, mse_nppr) = bias_mse(&nppr, truth).unzip();
    let (bias_ppr, mse_ppr) = bias_mse(&ppr, truth).unzip();
    let (coverage_nppr, n_coverage_nppr) = coverage(outcomes.iter().map(|o| o.nppr_covered));
    let (coverage_ppr, n_coverage_ppr) = coverage(outcomes.iter().map(|o| o.ppr_covered));
    ScenarioResult {
        scenario: scenario.clone(),
        n_runs: outcomes.len(),
        n_nppr_failed: outcomes.len() - nppr.len(),
        n_ppr_excluded: if ppr_fitted { outcomes.len() - ppr.len() } else { 0 },
        ppr_fitted,
        bias_nppr,
        mse_nppr,
        bias_ppr,
        mse_ppr,
        coverage_nppr,
        coverage_ppr,
        n_coverage_nppr,
        n_coverage_ppr,
    }
}

/// Runs `config.n_reps` replicates of a scenario; replicates execute in
/// parallel but the result is identical to a sequential run.
pub fn run_scenario(scenario: &Scenario, config: &StudyConfig) -> Result<ScenarioResult> {
    config.bootstrap.validate()?;
    let scenario = scenario.calibrated()?;
    let outcomes = (0..config.n_reps as u64)
        .into_par_iter()
        .map(|r| run_replicate(&scenario, r, config))
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate(&scenario, &outcomes, config))
}

pub fn run_grid(scenarios: &[Scenario], config: &StudyConfig) -> Result<Vec<ScenarioResult>> {
    scenarios.iter().map(|s| run_scenario(s, config)).collect()
}

/// One row of the summary table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub model: ModelKind,
    pub effect: f64,
    pub censoring: f64,
    pub n: usize,
    pub bias_nppr: Option<f64>,
    pub bias_ppr: Option<f64>,
    pub mse_nppr: Option<f64>,
    pub mse_ppr: Option<f64>,
    pub coverage_nppr: Option<f64>,
    pub coverage_ppr: Option<f64>,
    pub n_runs: usize,
    pub n_nppr_failed: usize,
    pub n_ppr_excluded: usize,
    pub censor_cmax: Option<f64>,
}

impl GridRow {
    pub const COLUMNS: [&'static str; 14] = [
        "model",
        "effect",
        "censoring",
        "n",
        "bias_nppr",
        "bias_ppr",
        "mse_nppr",
        "mse_ppr",
        "coverage_nppr",
        "coverage_ppr",
        "n_runs",
        "n_nppr_failed",
        "n_ppr_excluded",
        "censor_cmax",
    ];
}

fn effect_rank(beta: f64) -> usize {
    REFERENCE_EFFECTS
        .iter()
        .position(|row| row.0 == beta)
        .unwrap_or(REFERENCE_EFFECTS.len())
}

/// Summary table ordered like the reference tables: model, effect (table
/// order), censoring rate ascending, participants descending.
pub fn summarize_grid(results: &[ScenarioResult]) -> Vec<GridRow> {
    let mut rows: Vec<GridRow> = results
        .iter()
        .map(|r| GridRow {
            model: r.scenario.model.kind(),
            effect: r.scenario.effect_beta,
            censoring: r.scenario.censor_rate,
            n: r.scenario.n_participants,
            bias_nppr: r.bias_nppr,
            bias_ppr: r.bias_ppr,
            mse_nppr: r.mse_nppr,
            mse_ppr: r.mse_ppr,
            coverage_nppr: r.coverage_nppr,
            coverage_ppr: r.coverage_ppr,
            n_runs: r.n_runs,
            n_nppr_failed: r.n_nppr_failed,
            n_ppr_excluded: r.n_ppr_excluded,
            censor_cmax: r.scenario.censor_cmax,
        })
        .collect();
    rows.sort_by(|a, b| {
        let key = |r: &GridRow| (r.model == ModelKind::WeibullPh, effect_rank(r.effect));
        key(a)
            .cmp(&key(b))
            .then(a.effect.total_cmp(&b.effect))
            .then(a.censoring.total_cmp(&b.censoring))
            .then(b.n.cmp(&a.n))
    });
    rows
}
