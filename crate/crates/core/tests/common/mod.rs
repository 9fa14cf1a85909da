//! Independent reference implementations and generators shared by the
//! integration tests. Nothing here calls into the estimator internals.

#![allow(dead_code)]

use nppr::{validate_dataset, Dataset, Group};
use proptest::prelude::*;

/// Kaplan–Meier step at one distinct event time, by direct counting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleStep {
    pub time: f64,
    pub at_risk: usize,
    pub events: usize,
    pub survival: f64,
    pub greenwood_var: Option<f64>,
}

/// Product-limit estimate of `rows` (time, event) by recounting the risk set
/// at every distinct event time.
pub fn oracle_km(rows: &[(f64, bool)]) -> Vec<OracleStep> {
    let mut times: Vec<f64> = rows.iter().filter(|r| r.1).map(|r| r.0).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let mut steps = Vec::new();
    let mut survival = 1.0;
    let mut sum = Some(0.0);
    for &t in &times {
        let n = rows.iter().filter(|r| r.0 >= t).count();
        let d = rows.iter().filter(|r| r.1 && r.0 == t).count();
        survival *= 1.0 - d as f64 / n as f64;
        sum = match sum {
            Some(s) if n > d => Some(s + d as f64 / (n as f64 * (n - d) as f64)),
            _ => None,
        };
        steps.push(OracleStep { time: t, at_risk: n, events: d, survival, greenwood_var: sum.map(|s| survival * survival * s) });
    }
    steps
}

fn step_at(steps: &[OracleStep], t: f64) -> (f64, Option<f64>) {
    steps
        .iter()
        .rev()
        .find(|s| s.time <= t)
        .map_or((1.0, Some(0.0)), |s| (s.survival, s.greenwood_var))
}

fn group_rows(data: &Dataset, group: Group) -> Vec<(f64, bool)> {
    data.iter().filter(|o| o.group == group).map(|o| (o.time, o.event)).collect()
}

/// NPPR estimate computed from scratch: restricted event-time multiset,
/// pointwise log-RR, inverse-variance weighted mean. `None` when no usable
/// time remains.
pub fn oracle_nppr(data: &Dataset) -> Option<f64> {
    let r1 = group_rows(data, Group::Treatment);
    let r0 = group_rows(data, Group::Control);
    let ev = |rows: &[(f64, bool)]| -> Vec<f64> { rows.iter().filter(|r| r.1).map(|r| r.0).collect() };
    let (e1, e0) = (ev(&r1), ev(&r0));
    if e1.is_empty() || e0.is_empty() {
        return None;
    }
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = min(&e1).max(min(&e0));
    let hi = max(&e1).min(max(&e0));
    let mut tset: Vec<f64> = e1.iter().chain(&e0).copied().filter(|&t| t >= lo && t <= hi).collect();
    tset.sort_by(f64::total_cmp);
    let (k1, k0) = (oracle_km(&r1), oracle_km(&r0));
    let (mut num, mut den) = (0.0, 0.0);
    for t in tset {
        let (s1, v1) = step_at(&k1, t);
        let (s0, v0) = step_at(&k0, t);
        let (f1, f0) = (1.0 - s1, 1.0 - s0);
        let (Some(v1), Some(v0)) = (v1, v0) else { continue };
        if f1 <= 0.0 || f0 <= 0.0 {
            continue;
        }
        let omega = v1 / (f1 * f1) + v0 / (f0 * f0);
        if !(omega > 0.0) {
            continue;
        }
        num += (f0.ln() - f1.ln()) / omega;
        den += 1.0 / omega;
    }
    (den > 0.0).then(|| num / den)
}

/// Rows for `validate_dataset`, with times drawn from a small grid so ties
/// between and within groups are common.
pub fn rows_strategy(max_len: usize) -> impl Strategy<Value = Vec<(f64, i64, i64)>> {
    prop::collection::vec((1u8..=12, 0i64..=1, 0i64..=1), 2..=max_len)
        .prop_map(|v| v.into_iter().map(|(t, s, g)| (f64::from(t) * 0.5, s, g)).collect())
}

/// Valid two-group datasets (both groups present).
pub fn dataset_strategy(max_len: usize) -> impl Strategy<Value = Dataset> {
    rows_strategy(max_len).prop_filter_map("needs both groups", |rows| validate_dataset(rows).ok())
}

/// Larger datasets with continuous times and mostly events.
pub fn continuous_dataset_strategy(n: std::ops::Range<usize>) -> impl Strategy<Value = Dataset> {
    prop::collection::vec((0.01f64..100.0, prop::bool::weighted(0.75), prop::bool::ANY), n).prop_filter_map(
        "needs both groups",
        |v| validate_dataset(v.into_iter().map(|(t, s, g)| (t, i64::from(s), i64::from(g)))).ok(),
    )
}
