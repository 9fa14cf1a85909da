//! File formats: the `time,status,group` dataset CSV, scenario-grid JSON,
//! and analysis reports in table, delimited and structured (JSON) form.
//!
//! Machine formats write floats with Rust's shortest round-trip
//! representation, so parsing the output recovers the exact `f64`.

use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bootstrap::{percentile_bootstrap, BootstrapConfig, BootstrapResult, ConfidenceInterval};
use crate::data::{validate_dataset, Dataset, Group, RawRecord};
use crate::error::{Error, Result};
use crate::estimator::{analyze_with, NpprAnalysis, RiskDifferenceCurve, VarianceScale};
use crate::km::SurvivalCurve;
use crate::parametric::{CoxFit, PprFit};
use crate::sim::Scenario;
use crate::study::{GridRow, ScenarioResult};

pub const DATASET_COLUMNS: [&str; 3] = ["time", "status", "group"];

fn parse_code(field: &str, name: &str, row: usize) -> Result<i64> {
    let field = field.trim();
    if let Ok(v) = field.parse::<i64>() {
        return Ok(v);
    }
    match field.parse::<f64>() {
        Ok(v) if v.fract() == 0.0 && v.abs() < 1e15 => Ok(v as i64),
        _ => Err(Error::Validation { row, message: format!("cannot parse {name} value `{field}`") }),
    }
}

/// Parses a dataset CSV with a `time,status,group` header (any column order).
pub fn parse_dataset_csv<R: Read>(reader: R) -> Result<Dataset> {
    let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = csv.headers()?.clone();
    let mut index = [0usize; 3];
    for (slot, name) in index.iter_mut().zip(DATASET_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::MissingColumn(name.to_string()))?;
    }
    let mut rows = Vec::new();
    for (i, record) in csv.records().enumerate() {
        let row = i + 1;
        let record = record?;
        let field = |k: usize| record.get(index[k]).unwrap_or("");
        let time = field(0)
            .parse::<f64>()
            .map_err(|_| Error::Validation { row, message: format!("cannot parse time value `{}`", field(0)) })?;
        rows.push(RawRecord { time, status: parse_code(field(1), "status", row)?, group: parse_code(field(2), "group", row)? });
    }
    validate_dataset(rows)
}

pub fn read_dataset_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    parse_dataset_csv(BufReader::new(File::open(path)?))
}

pub fn write_dataset_csv<W: Write>(data: &Dataset, writer: W) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(DATASET_COLUMNS)?;
    for obs in data.iter() {
        csv.write_record([obs.time.to_string(), obs.status().to_string(), obs.group.code().to_string()])?;
    }
    csv.flush()?;
    Ok(())
}

#[derive(Deserialize)]
#[serde(untagged)]
enum GridFile {
    List(Vec<Scenario>),
    Wrapped { scenarios: Vec<Scenario> },
    Single(Box<Scenario>),
}

/// Parses a scenario grid: a JSON array of scenarios, an object with a
/// `scenarios` array, or a single scenario object.
pub fn parse_grid(text: &str) -> Result<Vec<Scenario>> {
    let scenarios = match serde_json::from_str::<GridFile>(text)? {
        GridFile::List(s) | GridFile::Wrapped { scenarios: s } => s,
        GridFile::Single(s) => vec![*s],
    };
    for s in &scenarios {
        s.validate()?;
    }
    Ok(scenarios)
}

pub fn read_grid(path: impl AsRef<Path>) -> Result<Vec<Scenario>> {
    parse_grid(&std::fs::read_to_string(path)?)
}

/// The bundled reference grid (90 cells, base seed 1).
pub const REFERENCE_GRID_JSON: &str = include_str!("../data/reference_grid.json");

pub fn write_grid<W: Write>(scenarios: &[Scenario], mut writer: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut writer, &serde_json::json!({ "scenarios": scenarios }))?;
    writeln!(writer)?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Table,
    Delimited,
    Structured,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointwiseEntry {
    pub time: f64,
    pub beta_t: f64,
    pub weight: f64,
}

/// Complete output of `fit`.
pub fn scale_name(scale: VarianceScale) -> &'static str {
    match scale {
        VarianceScale::Survival => "survival",
        VarianceScale::LogSurvival => "log_survival",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub beta: f64,
    pub rr: f64,
    pub ci_beta: Option<ConfidenceInterval>,
    pub ci_rr: Option<ConfidenceInterval>,
    pub bootstrap_resamples: usize,
    pub bootstrap_failed: usize,
    pub n_times_used: usize,
    pub n_times_dropped: usize,
    #[serde(default)]
    pub variance_scale: VarianceScale,
    pub t_min: f64,
    pub t_max: f64,
    pub n_treatment: usize,
    pub n_control: usize,
    pub events_treatment: usize,
    pub events_control: usize,
    pub rd_nnt_series: RiskDifferenceCurve,
    pub pointwise_series: Vec<PointwiseEntry>,
}

impl AnalysisReport {
    pub fn new(
        data: &Dataset,
        analysis: &NpprAnalysis,
        variance_scale: VarianceScale,
        bootstrap: Option<&BootstrapResult>,
    ) -> Self {
        let (t_min, t_max) = analysis.time_set.window.unwrap_or((f64::NAN, f64::NAN));
        AnalysisReport {
            beta: analysis.estimate.beta,
            rr: analysis.estimate.rr,
            ci_beta: bootstrap.map(|b| b.beta),
            ci_rr: bootstrap.map(|b| b.rr),
            bootstrap_resamples: bootstrap.map_or(0, |b| b.replicates.len() + b.n_failed),
            bootstrap_failed: bootstrap.map_or(0, |b| b.n_failed),
            n_times_used: analysis.estimate.n_times_used,
            n_times_dropped: analysis.series.n_dropped,
            variance_scale,
            t_min,
            t_max,
            n_treatment: data.group_size(Group::Treatment),
            n_control: data.group_size(Group::Control),
            events_treatment: data.event_count(Group::Treatment),
            events_control: data.event_count(Group::Control),
            rd_nnt_series: analysis.risk_difference(),
            pointwise_series: analysis
                .series
                .points
                .iter()
                .map(|p| PointwiseEntry { time: p.time, beta_t: p.beta_t, weight: p.weight() })
                .collect(),
        }
    }

    /// Runs the estimator and, when `bootstrap` is given, the percentile
    /// bootstrap with the same weighting.
    pub fn compute(data: &Dataset, scale: VarianceScale, bootstrap: Option<&BootstrapConfig>) -> Result<Self> {
        let analysis = analyze_with(data, scale)?;
        let boot = bootstrap
            .map(|cfg| percentile_bootstrap(data, &BootstrapConfig { variance_scale: scale, ..*cfg }))
            .transpose()?;
        Ok(AnalysisReport::new(data, &analysis, scale, boot.as_ref()))
    }

    /// Risk difference and NNT at the last series time not after `t`.
    pub fn nnt_at(&self, t: f64) -> Option<f64> {
        let k = self.rd_nnt_series.times.partition_point(|&x| x <= t);
        k.checked_sub(1).and_then(|i| self.rd_nnt_series.nnt[i])
    }

    fn summary(&self) -> Vec<(&'static str, String)> {
        let opt = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
        vec![
            ("beta", self.beta.to_string()),
            ("rr", self.rr.to_string()),
            ("ci_level", opt(self.ci_beta.map(|c| c.level))),
            ("ci_beta_lower", opt(self.ci_beta.map(|c| c.lower))),
            ("ci_beta_upper", opt(self.ci_beta.map(|c| c.upper))),
            ("ci_rr_lower", opt(self.ci_rr.map(|c| c.lower))),
            ("ci_rr_upper", opt(self.ci_rr.map(|c| c.upper))),
            ("bootstrap_resamples", self.bootstrap_resamples.to_string()),
            ("bootstrap_failed", self.bootstrap_failed.to_string()),
            ("n_times_used", self.n_times_used.to_string()),
            ("n_times_dropped", self.n_times_dropped.to_string()),
            ("variance_scale", scale_name(self.variance_scale).to_string()),
            ("t_min", self.t_min.to_string()),
            ("t_max", self.t_max.to_string()),
            ("n_treatment", self.n_treatment.to_string()),
            ("n_control", self.n_control.to_string()),
            ("events_treatment", self.events_treatment.to_string()),
            ("events_control", self.events_control.to_string()),
        ]
    }
}

pub fn parse_report_json(text: &str) -> Result<AnalysisReport> {
    Ok(serde_json::from_str(text)?)
}

fn write_key_values<W: Write>(rows: &[(&str, String)], format: OutputFormat, mut out: W) -> Result<()> {
    match format {
        OutputFormat::Delimited => {
            let mut csv = csv::Writer::from_writer(out);
            csv.write_record(["key", "value"])?;
            for (k, v) in rows {
                csv.write_record([*k, v.as_str()])?;
            }
            csv.flush()?;
        }
        _ => {
            let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            for (k, v) in rows {
                let v = if v.is_empty() { "-" } else { v.as_str() };
                writeln!(out, "{k:<width$}  {v}")?;
            }
        }
    }
    Ok(())
}

/// Serializes a report. `Delimited` writes the `key,value` summary; the data
/// series are available through [`write_series`].
pub fn emit_report<W: Write>(report: &AnalysisReport, format: OutputFormat, mut out: W) -> Result<()> {
    match format {
        OutputFormat::Structured => {
            serde_json::to_writer_pretty(&mut out, report)?;
            writeln!(out)?;
        }
        OutputFormat::Delimited => write_key_values(&report.summary(), format, out)?,
        OutputFormat::Table => {
            let fmt = |v: f64| format!("{v:.4}");
            writeln!(out, "NPPR estimate")?;
            writeln!(out, "  beta = {}   RR = {}", fmt(report.beta), fmt(report.rr))?;
            if let (Some(b), Some(r)) = (report.ci_beta, report.ci_rr) {
                let pct = b.level * 100.0;
                writeln!(out, "  {pct}% CI beta [{}, {}]   RR [{}, {}]", fmt(b.lower), fmt(b.upper), fmt(r.lower), fmt(r.upper))?;
                writeln!(out, "  bootstrap: {} resamples, {} failed", report.bootstrap_resamples, report.bootstrap_failed)?;
            }
            writeln!(out, "  event times used: {} (dropped {})", report.n_times_used, report.n_times_dropped)?;
            writeln!(out, "  window: [{}, {}]", fmt(report.t_min), fmt(report.t_max))?;
            writeln!(
                out,
                "  treatment: {} subjects, {} events; control: {} subjects, {} events",
                report.n_treatment, report.events_treatment, report.n_control, report.events_control
            )?;
        }
    }
    Ok(())
}

pub fn emit_ppr_fit<W: Write>(fit: &PprFit, format: OutputFormat, mut out: W) -> Result<()> {
    if format == OutputFormat::Structured {
        serde_json::to_writer_pretty(&mut out, fit)?;
        writeln!(out)?;
        return Ok(());
    }
    let opt = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
    let rows = vec![
        ("alpha", fit.params.alpha.to_string()),
        ("theta1", fit.params.theta1.to_string()),
        ("theta0", fit.params.theta0.to_string()),
        ("neg_log_rr", fit.neg_log_rr.to_string()),
        ("rr", fit.rr.to_string()),
        ("se_neg_log_rr", opt(fit.se_neg_log_rr)),
        ("ci_neg_log_rr_lower", opt(fit.ci_neg_log_rr.map(|c| c.lower))),
        ("ci_neg_log_rr_upper", opt(fit.ci_neg_log_rr.map(|c| c.upper))),
        ("ci_rr_lower", opt(fit.ci_rr.map(|c| c.lower))),
        ("ci_rr_upper", opt(fit.ci_rr.map(|c| c.upper))),
        ("loglik", fit.loglik.to_string()),
        ("converged", fit.converged.to_string()),
        ("theta1_at_bound", fit.theta1_at_bound.to_string()),
        ("theta0_at_bound", fit.theta0_at_bound.to_string()),
        ("iterations", fit.iterations.to_string()),
        ("reason", fit.reason.clone().unwrap_or_default()),
    ];
    write_key_values(&rows, format, out)
}

pub fn emit_cox_fit<W: Write>(fit: &CoxFit, format: OutputFormat, mut out: W) -> Result<()> {
    if format == OutputFormat::Structured {
        serde_json::to_writer_pretty(&mut out, fit)?;
        writeln!(out)?;
        return Ok(());
    }
    let opt = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
    let rows = vec![
        ("log_hr", fit.log_hr.to_string()),
        ("hr", fit.hr.to_string()),
        ("se_log_hr", opt(fit.se_log_hr)),
        ("ci_hr_lower", opt(fit.ci_hr.map(|c| c.lower))),
        ("ci_hr_upper", opt(fit.ci_hr.map(|c| c.upper))),
        ("converged", fit.converged.to_string()),
        ("iterations", fit.iterations.to_string()),
    ];
    write_key_values(&rows, format, out)
}

/// Writes the study summary table.
pub fn emit_grid_rows<W: Write>(rows: &[GridRow], format: OutputFormat, mut out: W) -> Result<()> {
    let opt = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
    match format {
        OutputFormat::Structured => {
            serde_json::to_writer_pretty(&mut out, rows)?;
            writeln!(out)?;
        }
        OutputFormat::Delimited => {
            let mut csv = csv::Writer::from_writer(out);
            csv.write_record(GridRow::COLUMNS)?;
            for r in rows {
                csv.write_record([
                    model_label(r),
                    r.effect.to_string(),
                    r.censoring.to_string(),
                    r.n.to_string(),
                    opt(r.bias_nppr),
                    opt(r.bias_ppr),
                    opt(r.mse_nppr),
                    opt(r.mse_ppr),
                    opt(r.coverage_nppr),
                    opt(r.coverage_ppr),
                    r.n_runs.to_string(),
                    r.n_nppr_failed.to_string(),
                    r.n_ppr_excluded.to_string(),
                    opt(r.censor_cmax),
                ])?;
            }
            csv.flush()?;
        }
        OutputFormat::Table => {
            let cell = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.3}"));
            writeln!(
                out,
                "{:<11} {:>6} {:>5} {:>5} | {:>7} {:>7} | {:>6} {:>6} | {:>6} {:>6} | {:>5} {:>5}",
                "model", "effect", "cens", "n", "biasNP", "biasPPR", "mseNP", "msePPR", "covNP", "covPPR", "fail", "excl"
            )?;
            for r in rows {
                writeln!(
                    out,
                    "{:<11} {:>6.2} {:>5.0} {:>5} | {:>7} {:>7} | {:>6} {:>6} | {:>6} {:>6} | {:>5} {:>5}",
                    model_label(r),
                    r.effect,
                    r.censoring * 100.0,
                    r.n,
                    cell(r.bias_nppr),
                    cell(r.bias_ppr),
                    cell(r.mse_nppr),
                    cell(r.mse_ppr),
                    cell(r.coverage_nppr),
                    cell(r.coverage_ppr),
                    r.n_nppr_failed,
                    r.n_ppr_excluded
                )?;
            }
        }
    }
    Ok(())
}

fn model_label(r: &GridRow) -> String {
    match r.model {
        crate::sim::ModelKind::PprEu => "PPR_EU".into(),
        crate::sim::ModelKind::WeibullPh => "WEIBULL_PH".into(),
    }
}

pub fn emit_results_json<W: Write>(results: &[ScenarioResult], mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, results)?;
    writeln!(out)?;
    Ok(())
}

/// Plot-ready data series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Series {
    /// Kaplan–Meier CDF steps of both groups.
    Cdf,
    /// Pointwise log-RR per distinct time of the restricted set.
    BetaT,
    /// Inverse-variance weights per distinct time of the restricted set.
    Weights,
    /// Risk difference and NNT per distinct time of the restricted set.
    Nnt,
}

fn curve_rows(curve: &SurvivalCurve, group: Group, rows: &mut Vec<Vec<String>>) {
    for (i, &t) in curve.event_times.iter().enumerate() {
        rows.push(vec![
            group.code().to_string(),
            t.to_string(),
            (1.0 - curve.survival[i]).to_string(),
            curve.greenwood_var[i].map_or_else(String::new, |v| v.to_string()),
            curve.at_risk[i].to_string(),
            curve.events[i].to_string(),
        ]);
    }
}

/// Header and rows of one series.
pub fn series_table(analysis: &NpprAnalysis, series: Series) -> (Vec<&'static str>, Vec<Vec<String>>) {
    let mut rows = Vec::new();
    match series {
        Series::Cdf => {
            curve_rows(&analysis.treatment, Group::Treatment, &mut rows);
            curve_rows(&analysis.control, Group::Control, &mut rows);
            (vec!["group", "time", "cdf", "greenwood_var", "at_risk", "events"], rows)
        }
        Series::BetaT | Series::Weights => {
            let points = &analysis.series.points;
            let mut i = 0;
            while i < points.len() {
                let p = points[i];
                let mut m = 0;
                while i < points.len() && points[i].time == p.time {
                    m += 1;
                    i += 1;
                }
                let mut row = vec![p.time.to_string(), m.to_string()];
                if series == Series::BetaT {
                    row.push(p.beta_t.to_string());
                    row.push(analysis.estimate.beta.to_string());
                } else {
                    row.push(p.weight_var.to_string());
                    row.push(p.weight().to_string());
                }
                rows.push(row);
            }
            if series == Series::BetaT {
                (vec!["time", "multiplicity", "beta_t", "beta"], rows)
            } else {
                (vec!["time", "multiplicity", "weight_var", "weight"], rows)
            }
        }
        Series::Nnt => {
            let rd = analysis.risk_difference();
            for i in 0..rd.times.len() {
                rows.push(vec![
                    rd.times[i].to_string(),
                    rd.rd[i].to_string(),
                    rd.nnt[i].map_or_else(String::new, |v| v.to_string()),
                ]);
            }
            (vec!["time", "rd", "nnt"], rows)
        }
    }
}

pub fn write_series<W: Write>(analysis: &NpprAnalysis, series: Series, writer: W) -> Result<()> {
    let (header, rows) = series_table(analysis, series);
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(&header)?;
    for row in rows {
        csv.write_record(&row)?;
    }
    csv.flush()?;
    Ok(())
}
