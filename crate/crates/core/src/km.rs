//! Kaplan–Meier product-limit curves with Greenwood variances.

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Group};

/// Step-function survival estimate for one group.
///
/// Entries are indexed by the distinct event times of the group. A
/// `greenwood_var` of `None` marks a time where the Greenwood sum diverges
/// (everyone still at risk had the event, so `n_j == d_j`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalCurve {
    pub event_times: Vec<f64>,
    pub survival: Vec<f64>,
    pub greenwood_var: Vec<Option<f64>>,
    pub at_risk: Vec<usize>,
    pub events: Vec<usize>,
}

impl SurvivalCurve {
    pub fn is_empty(&self) -> bool {
        self.event_times.is_empty()
    }

    pub fn len(&self) -> usize {
        self.event_times.len()
    }

    /// Total number of events, counting ties.
    pub fn total_events(&self) -> usize {
        self.events.iter().sum()
    }

    /// Number of event times `<= t`; the index one past the step in effect at `t`.
    fn steps_through(&self, t: f64) -> usize {
        self.event_times.partition_point(|&x| x <= t)
    }

    /// Right-continuous survival estimate at `t`.
    pub fn survival_at(&self, t: f64) -> f64 {
        match self.steps_through(t) {
            0 => 1.0,
            k => self.survival[k - 1],
        }
    }

    /// Greenwood variance of the survival estimate at `t`, carried forward
    /// from the last event time at or before `t`. Zero before the first event.
    pub fn greenwood_var_at(&self, t: f64) -> Option<f64> {
        match self.steps_through(t) {
            0 => Some(0.0),
            k => self.greenwood_var[k - 1],
        }
    }

    /// Event times with their tie multiplicities, in ascending order.
    pub fn event_multiset(&self) -> impl Iterator<Item = (f64, usize)> + '_ {
        self.event_times.iter().copied().zip(self.events.iter().copied())
    }
}

/// Estimated CDF `1 - S(t)` as a right-continuous step function.
pub fn cdf_at(curve: &SurvivalCurve, t: f64) -> f64 {
    1.0 - curve.survival_at(t)
}

/// Product-limit estimate for one group of `data`.
///
/// Events at a time are processed before censorings at the same time, so a
/// subject censored at `t_j` is still at risk at `t_j`.
pub fn kaplan_meier(data: &Dataset, group: Group) -> SurvivalCurve {
    let rows: Vec<(f64, bool)> = data
        .iter()
        .filter(|o| o.group == group)
        .map(|o| (o.time, o.event))
        .collect();
    kaplan_meier_from(rows)
}

/// Product-limit estimate from `(time, event)` pairs of a single group.
pub fn kaplan_meier_from(mut rows: Vec<(f64, bool)>) -> SurvivalCurve {
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut curve = SurvivalCurve {
        event_times: Vec::new(),
        survival: Vec::new(),
        greenwood_var: Vec::new(),
        at_risk: Vec::new(),
        events: Vec::new(),
    };

    let mut n_at_risk = rows.len();
    let mut surv = 1.0_f64;
    let mut greenwood_sum = 0.0_f64;
    let mut diverged = false;

    let mut i = 0;
    while i < rows.len() {
        let t = rows[i].0;
        let mut deaths = 0;
        let mut removed = 0;
        while i < rows.len() && rows[i].0 == t {
            deaths += usize::from(rows[i].1);
            removed += 1;
            i += 1;
        }
        if deaths > 0 {
            let n = n_at_risk as f64;
            let d = deaths as f64;
            surv *= 1.0 - d / n;
            if deaths < n_at_risk && !diverged {
                greenwood_sum += d / (n * (n - d));
            } else {
                diverged = true;
            }
            curve.event_times.push(t);
            curve.survival.push(surv);
            curve
                .greenwood_var
                .push((!diverged).then_some(surv * surv * greenwood_sum));
            curve.at_risk.push(n_at_risk);
            curve.events.push(deaths);
        }
        n_at_risk -= removed;
    }
    curve
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(v: &[(f64, u8)]) -> Vec<(f64, bool)> {
        v.iter().map(|&(t, s)| (t, s == 1)).collect()
    }

    #[test]
    fn hand_computed_curve() {
        let curve = kaplan_meier_from(rows(&[(2.0, 1), (4.0, 0), (5.0, 1), (6.0, 0)]));
        assert_eq!(curve.event_times, vec![2.0, 5.0]);
        assert_eq!(curve.at_risk, vec![4, 2]);
        assert_eq!(curve.events, vec![1, 1]);
        assert!((curve.survival[0] - 0.75).abs() < 1e-15);
        assert!((curve.survival[1] - 0.375).abs() < 1e-15);
        let v0 = curve.greenwood_var[0].unwrap();
        let v1 = curve.greenwood_var[1].unwrap();
        assert!((v0 - 0.046875).abs() < 1e-15);
        // 0.375^2 * (1/12 + 1/2)
        assert!((v1 - 0.08203125).abs() < 1e-15);
    }

    #[test]
    fn step_lookup_is_right_continuous() {
        let curve = kaplan_meier_from(rows(&[(2.0, 1), (4.0, 0), (5.0, 1), (6.0, 0)]));
        assert_eq!(cdf_at(&curve, 0.5), 0.0);
        assert!((cdf_at(&curve, 3.0) - 0.25).abs() < 1e-15);
        assert!((cdf_at(&curve, 2.0) - 0.25).abs() < 1e-15);
        assert!((cdf_at(&curve, 5.0) - 0.625).abs() < 1e-15);
        assert_eq!(curve.greenwood_var_at(1.0), Some(0.0));
        assert_eq!(curve.greenwood_var_at(4.9), curve.greenwood_var[0]);
    }

    #[test]
    fn all_tied_events_diverge() {
        let curve = kaplan_meier_from(rows(&[(1.0, 1), (1.0, 1)]));
        assert_eq!(curve.event_times, vec![1.0]);
        assert_eq!(curve.events, vec![2]);
        assert_eq!(curve.survival, vec![0.0]);
        assert_eq!(curve.greenwood_var, vec![None]);
    }

    #[test]
    fn all_censored_gives_empty_curve() {
        let curve = kaplan_meier_from(rows(&[(1.0, 0), (3.0, 0)]));
        assert!(curve.is_empty());
        assert_eq!(cdf_at(&curve, 10.0), 0.0);
    }

    #[test]
    fn event_precedes_censoring_at_same_time() {
        // the censored subject at t=2 is still at risk for the death at t=2
        let curve = kaplan_meier_from(rows(&[(2.0, 0), (2.0, 1), (3.0, 1)]));
        assert_eq!(curve.at_risk, vec![3, 1]);
        assert!((curve.survival[0] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(curve.survival[1], 0.0);
        assert_eq!(curve.greenwood_var[1], None);
    }
}
