//! Cox partial likelihood with a single treatment indicator and Breslow ties.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::bootstrap::ConfidenceInterval;
use crate::data::{Dataset, Group};

const MAX_ITERATIONS: usize = 100;
/// Coefficients beyond this magnitude indicate a monotone likelihood.
const DIVERGENCE_BOUND: f64 = 25.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoxFit {
    /// Log hazard ratio of treatment versus control.
    pub log_hr: f64,
    pub hr: f64,
    pub se_log_hr: Option<f64>,
    pub ci_hr: Option<ConfidenceInterval>,
    pub converged: bool,
    pub iterations: usize,
}

/// Risk-set counts at one distinct event time.
#[derive(Debug, Clone, Copy)]
struct RiskSet {
    at_risk_treated: f64,
    at_risk_control: f64,
    events_treated: f64,
    events: f64,
}

fn risk_sets(data: &Dataset) -> Vec<RiskSet> {
    let mut rows: Vec<(f64, bool, bool)> = data
        .iter()
        .map(|o| (o.time, o.event, o.group == Group::Treatment))
        .collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut n1 = rows.iter().filter(|r| r.2).count() as f64;
    let mut n0 = rows.len() as f64 - n1;
    let mut out = Vec::new();
    let mut i = 0;
    while i < rows.len() {
        let t = rows[i].0;
        let (mut d, mut d1, mut left1, mut left0) = (0.0, 0.0, 0.0, 0.0);
        while i < rows.len() && rows[i].0 == t {
            let (_, event, treated) = rows[i];
            if event {
                d += 1.0;
                if treated {
                    d1 += 1.0;
                }
            }
            if treated {
                left1 += 1.0;
            } else {
                left0 += 1.0;
            }
            i += 1;
        }
        if d > 0.0 {
            out.push(RiskSet { at_risk_treated: n1, at_risk_control: n0, events_treated: d1, events: d });
        }
        n1 -= left1;
        n0 -= left0;
    }
    out
}

/// Breslow partial log-likelihood at log hazard ratio `b`.
pub fn partial_log_likelihood(data: &Dataset, b: f64) -> f64 {
    risk_sets(data).iter().map(|r| log_lik_term(r, b)).sum()
}

fn log_lik_term(r: &RiskSet, b: f64) -> f64 {
    r.events_treated * b - r.events * (r.at_risk_control + r.at_risk_treated * b.exp()).ln()
}

/// Score and information at `b`.
fn derivatives(sets: &[RiskSet], b: f64) -> (f64, f64) {
    let eb = b.exp();
    sets.iter().fold((0.0, 0.0), |(u, i), r| {
        let p = r.at_risk_treated * eb / (r.at_risk_control + r.at_risk_treated * eb);
        (u + r.events_treated - r.events * p, i + r.events * p * (1.0 - p))
    })
}

/// Two-group Cox fit by Newton iteration with step halving.
pub fn cox_two_group(data: &Dataset) -> CoxFit {
    cox_two_group_at_level(data, 0.95)
}

pub fn cox_two_group_at_level(data: &Dataset, level: f64) -> CoxFit {
    let sets = risk_sets(data);
    let loglik = |b: f64| sets.iter().map(|r| log_lik_term(r, b)).sum::<f64>();
    let mut b = 0.0;
    let mut current = loglik(b);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let (score, info) = derivatives(&sets, b);
        if !(info > 0.0) {
            break;
        }
        let mut step = score / info;
        let mut next = b + step;
        let mut value = loglik(next);
        let mut halvings = 0;
        while !(value >= current) && halvings < 30 {
            step /= 2.0;
            next = b + step;
            value = loglik(next);
            halvings += 1;
        }
        b = next;
        current = value;
        if b.abs() > DIVERGENCE_BOUND {
            break;
        }
        if step.abs() < 1e-10 {
            converged = true;
            break;
        }
    }

    let (_, info) = derivatives(&sets, b);
    let se = (converged && info > 0.0).then(|| 1.0 / info.sqrt());
    let ci_hr = se.map(|se| {
        let z = Normal::standard().inverse_cdf(0.5 + level / 2.0);
        ConfidenceInterval {
            lower: (b - z * se).exp(),
            upper: (b + z * se).exp(),
            level,
            n_effective: data.len(),
        }
    });
    CoxFit { log_hr: b, hr: b.exp(), se_log_hr: se, ci_hr, converged: se.is_some(), iterations }
}
