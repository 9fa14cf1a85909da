//! The non-parametric proportional-risk (NPPR) estimator.
//!
//! Under proportional risks, `F1(t) / F0(t) = exp(-beta)` for all `t`. The
//! estimator evaluates the pointwise log relative risk at every event time in
//! the overlap of both groups' event-time ranges and averages those values
//! with inverse-variance weights, where the variance of each pointwise value
//! comes from Greenwood's formula via the delta method.

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Group};
use crate::error::{EstimationFailure, Result};
use crate::km::{cdf_at, kaplan_meier, SurvivalCurve};

/// Event times of both groups restricted to `[t_min, t_max]`, where
/// `t_min = max(min T1, min T0)` and `t_max = min(max T1, max T0)`.
///
/// Ties are kept: a time that occurs `m` times across both groups appears
/// `m` times in `times`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventTimeSet {
    /// `(t_min, t_max)`, absent when either group has no events. May be an
    /// inverted window (`t_min > t_max`), in which case `times` is empty.
    pub window: Option<(f64, f64)>,
    pub times: Vec<f64>,
}

impl EventTimeSet {
    /// Builds the set from raw event-time multisets of the two groups.
    pub fn from_event_times(treatment: &[f64], control: &[f64]) -> EventTimeSet {
        let extrema = |ts: &[f64]| -> Option<(f64, f64)> {
            let lo = ts.iter().copied().reduce(f64::min)?;
            let hi = ts.iter().copied().reduce(f64::max)?;
            Some((lo, hi))
        };
        let (Some((min1, max1)), Some((min0, max0))) = (extrema(treatment), extrema(control))
        else {
            return EventTimeSet { window: None, times: Vec::new() };
        };
        let t_min = min1.max(min0);
        let t_max = max1.min(max0);
        let mut times: Vec<f64> = treatment
            .iter()
            .chain(control)
            .copied()
            .filter(|&t| t_min <= t && t <= t_max)
            .collect();
        times.sort_by(f64::total_cmp);
        EventTimeSet { window: Some((t_min, t_max)), times }
    }

    /// Builds the set from two curves, using each curve's event counts as
    /// the tie multiplicities.
    pub fn from_curves(treatment: &SurvivalCurve, control: &SurvivalCurve) -> EventTimeSet {
        let expand = |c: &SurvivalCurve| -> Vec<f64> {
            c.event_multiset()
                .flat_map(|(t, m)| std::iter::repeat_n(t, m))
                .collect()
        };
        EventTimeSet::from_event_times(&expand(treatment), &expand(control))
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn t_min(&self) -> Option<f64> {
        self.window.map(|w| w.0)
    }

    pub fn t_max(&self) -> Option<f64> {
        self.window.map(|w| w.1)
    }

    /// Distinct times of the set, ascending.
    pub fn distinct_times(&self) -> Vec<f64> {
        let mut out = self.times.clone();
        out.dedup();
        out
    }
}

/// Which Greenwood-type variance term enters `omega(t)`.
///
/// `Survival` is the delta-method variance `Var(S_i(t)) / F_i(t)^2` with
/// `Var(S_i(t))` from Greenwood's formula. `LogSurvival` replaces `Var(S_i)`
/// by the Greenwood variance of `log S_i`, the bare sum
/// `sum d / (n (n - d))`, which is what common survival software reports as
/// the squared standard error of a fitted curve. The two schemes give the same
/// estimate up to weighting; `LogSurvival` places less weight on late times
/// where the survival estimate is small.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceScale {
    #[default]
    Survival,
    LogSurvival,
}

/// Log relative risk at a single time with its delta-method variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointwiseLogRR {
    pub time: f64,
    /// `-log(F1(t) / F0(t))`
    pub beta_t: f64,
    pub var_log_f1: f64,
    pub var_log_f0: f64,
    /// `omega(t) = var_log_f1 + var_log_f0`; the weight is its reciprocal.
    pub weight_var: f64,
}

impl PointwiseLogRR {
    pub fn weight(&self) -> f64 {
        1.0 / self.weight_var
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointwiseSeries {
    pub points: Vec<PointwiseLogRR>,
    /// Entries of the event-time set skipped because a Greenwood variance was
    /// undefined or the combined variance was zero.
    pub n_dropped: usize,
}

/// Pointwise log-RR values at every entry of `tset`, multiplicity included.
pub fn pointwise_log_rr(
    treatment: &SurvivalCurve,
    control: &SurvivalCurve,
    tset: &EventTimeSet,
) -> Result<PointwiseSeries, EstimationFailure> {
    pointwise_log_rr_with(treatment, control, tset, VarianceScale::Survival)
}

pub fn pointwise_log_rr_with(
    treatment: &SurvivalCurve,
    control: &SurvivalCurve,
    tset: &EventTimeSet,
    scale: VarianceScale,
) -> Result<PointwiseSeries, EstimationFailure> {
    if tset.is_empty() {
        return Err(EstimationFailure::EmptyTimeSet);
    }
    let mut points = Vec::with_capacity(tset.times.len());
    let mut n_dropped = 0;
    for &t in &tset.times {
        match pointwise_at(treatment, control, t, scale) {
            Some(p) => points.push(p),
            None => n_dropped += 1,
        }
    }
    if points.is_empty() {
        return Err(EstimationFailure::AllTimesDropped { dropped: n_dropped });
    }
    Ok(PointwiseSeries { points, n_dropped })
}

fn pointwise_at(
    treatment: &SurvivalCurve,
    control: &SurvivalCurve,
    t: f64,
    scale: VarianceScale,
) -> Option<PointwiseLogRR> {
    let f1 = cdf_at(treatment, t);
    let f0 = cdf_at(control, t);
    if f1 <= 0.0 || f0 <= 0.0 {
        return None;
    }
    let var_log_f1 = variance_term(treatment, t, scale)? / (f1 * f1);
    let var_log_f0 = variance_term(control, t, scale)? / (f0 * f0);
    let weight_var = var_log_f1 + var_log_f0;
    if !(weight_var > 0.0 && weight_var.is_finite()) {
        return None;
    }
    // log F0 - log F1 rather than -log(F1/F0): exactly antisymmetric under a
    // swap of the two groups.
    let beta_t = f0.ln() - f1.ln();
    Some(PointwiseLogRR { time: t, beta_t, var_log_f1, var_log_f0, weight_var })
}

fn variance_term(curve: &SurvivalCurve, t: f64, scale: VarianceScale) -> Option<f64> {
    let var = curve.greenwood_var_at(t)?;
    match scale {
        VarianceScale::Survival => Some(var),
        VarianceScale::LogSurvival => {
            let s = curve.survival_at(t);
            (s > 0.0).then(|| var / (s * s))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NpprEstimate {
    pub beta: f64,
    /// Sum of the inverse-variance weights.
    pub total_weight: f64,
    /// `exp(-beta)`
    pub rr: f64,
    pub n_times_used: usize,
}

/// Inverse-variance weighted mean of the pointwise log-RR values, in the
/// order given (ascending time for series produced by [`pointwise_log_rr`]).
pub fn nppr_point_estimate(points: &[PointwiseLogRR]) -> Result<NpprEstimate, EstimationFailure> {
    if points.is_empty() {
        return Err(EstimationFailure::EmptyTimeSet);
    }
    let mut total_weight = 0.0;
    let mut weighted = 0.0;
    for p in points {
        total_weight += 1.0 / p.weight_var;
        weighted += p.beta_t / p.weight_var;
    }
    let beta = weighted / total_weight;
    Ok(NpprEstimate { beta, total_weight, rr: (-beta).exp(), n_times_used: points.len() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskDifferenceCurve {
    pub times: Vec<f64>,
    /// `(1 - exp(-beta)) * F0(t)`
    pub rd: Vec<f64>,
    /// `1 / rd`, `None` where the risk difference is zero.
    pub nnt: Vec<Option<f64>>,
}

pub fn risk_difference_curve(
    estimate: &NpprEstimate,
    control: &SurvivalCurve,
    times: &[f64],
) -> RiskDifferenceCurve {
    let effect = 1.0 - estimate.rr;
    let rd: Vec<f64> = times.iter().map(|&t| effect * cdf_at(control, t)).collect();
    let nnt = rd.iter().map(|&r| (r != 0.0).then(|| 1.0 / r)).collect();
    RiskDifferenceCurve { times: times.to_vec(), rd, nnt }
}

/// Every intermediate of one NPPR fit.
#[derive(Debug, Clone, PartialEq)]
pub struct NpprAnalysis {
    pub treatment: SurvivalCurve,
    pub control: SurvivalCurve,
    pub time_set: EventTimeSet,
    pub series: PointwiseSeries,
    pub estimate: NpprEstimate,
}

impl NpprAnalysis {
    /// Risk difference and NNT at each distinct time of the event-time set.
    pub fn risk_difference(&self) -> RiskDifferenceCurve {
        risk_difference_curve(&self.estimate, &self.control, &self.time_set.distinct_times())
    }
}

/// Runs the full estimator on a dataset.
pub fn analyze(data: &Dataset) -> Result<NpprAnalysis, EstimationFailure> {
    analyze_with(data, VarianceScale::Survival)
}

pub fn analyze_with(data: &Dataset, scale: VarianceScale) -> Result<NpprAnalysis, EstimationFailure> {
    let treatment = kaplan_meier(data, Group::Treatment);
    let control = kaplan_meier(data, Group::Control);
    let time_set = EventTimeSet::from_curves(&treatment, &control);
    let series = pointwise_log_rr_with(&treatment, &control, &time_set, scale)?;
    let estimate = nppr_point_estimate(&series.points)?;
    Ok(NpprAnalysis { treatment, control, time_set, series, estimate })
}

/// Point estimate only.
pub fn estimate(data: &Dataset) -> Result<NpprEstimate, EstimationFailure> {
    analyze(data).map(|a| a.estimate)
}

pub fn estimate_with(data: &Dataset, scale: VarianceScale) -> Result<NpprEstimate, EstimationFailure> {
    analyze_with(data, scale).map(|a| a.estimate)
}

/// Convenience wrapper returning the crate error type.
pub fn estimate_dataset(data: &Dataset) -> Result<NpprEstimate> {
    Ok(estimate(data)?)
}
