use serde::{Deserialize, Serialize};

use super::{check_probability, GroupModel};
use crate::data::{Dataset, Group};
use crate::error::Result;

/// Exponentiated-uniform model: `F_i(t) = (theta_i t)^alpha` on `(0, 1/theta_i]`,
/// with a shape shared by both groups. The relative risk is constant,
/// `(theta1 / theta0)^alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EuParams {
    pub alpha: f64,
    pub theta1: f64,
    pub theta0: f64,
}

impl EuParams {
    pub fn new(alpha: f64, theta1: f64, theta0: f64) -> Self {
        EuParams { alpha, theta1, theta0 }
    }

    pub fn theta(&self, group: Group) -> f64 {
        match group {
            Group::Treatment => self.theta1,
            Group::Control => self.theta0,
        }
    }

    pub fn rr(&self) -> f64 {
        (self.theta1 / self.theta0).powf(self.alpha)
    }

    /// `-log RR = alpha * (log theta0 - log theta1)`
    pub fn neg_log_rr(&self) -> f64 {
        self.alpha * (self.theta0.ln() - self.theta1.ln())
    }

    pub fn is_valid(&self) -> bool {
        [self.alpha, self.theta1, self.theta0].iter().all(|v| v.is_finite() && *v > 0.0)
    }
}

pub fn eu_cdf(params: &EuParams, group: Group, t: f64) -> f64 {
    let theta = params.theta(group);
    if t <= 0.0 {
        0.0
    } else if t * theta >= 1.0 {
        1.0
    } else {
        (theta * t).powf(params.alpha)
    }
}

pub fn eu_quantile(params: &EuParams, group: Group, u: f64) -> Result<f64> {
    check_probability(u)?;
    Ok(u.powf(1.0 / params.alpha) / params.theta(group))
}

/// Censored-data log-likelihood. Events contribute the log density
/// `log alpha + alpha log theta + (alpha - 1) log t`; censored rows contribute
/// `log(1 - (theta t)^alpha)`. Returns negative infinity when a row lies
/// outside its group's support.
pub fn eu_log_likelihood(data: &Dataset, params: &EuParams) -> f64 {
    if !params.is_valid() {
        return f64::NEG_INFINITY;
    }
    log_likelihood_on_log_scale(data, params.alpha, [params.theta0.ln(), params.theta1.ln()])
}

/// Same likelihood with `log theta` supplied directly, indexed by group code,
/// so a parameter placed exactly on the support bound stays inside it.
pub(crate) fn log_likelihood_on_log_scale(data: &Dataset, alpha: f64, log_theta: [f64; 2]) -> f64 {
    if !(alpha.is_finite() && alpha > 0.0) || log_theta.iter().any(|v| !v.is_finite()) {
        return f64::NEG_INFINITY;
    }
    let log_alpha = alpha.ln();
    let mut total = 0.0;
    for obs in data.iter() {
        let lt = log_theta[usize::from(obs.group.code())];
        // log(theta t), compared against 0 to test the support bound
        let log_scaled = lt + obs.time.ln();
        if obs.event {
            if log_scaled > 0.0 {
                return f64::NEG_INFINITY;
            }
            total += log_alpha + alpha * lt + (alpha - 1.0) * obs.time.ln();
        } else {
            if log_scaled >= 0.0 {
                return f64::NEG_INFINITY;
            }
            // log(1 - exp(alpha log_scaled))
            total += (-(alpha * log_scaled).exp_m1()).ln();
        }
    }
    total
}

impl GroupModel for EuParams {
    fn cdf(&self, group: Group, t: f64) -> f64 {
        eu_cdf(self, group, t)
    }

    fn quantile(&self, group: Group, u: f64) -> Result<f64> {
        eu_quantile(self, group, u)
    }

    fn support_end(&self, group: Group) -> Option<f64> {
        Some(1.0 / self.theta(group))
    }

    fn mean(&self, group: Group) -> f64 {
        self.alpha / (self.alpha + 1.0) / self.theta(group)
    }
}
