use serde::{Deserialize, Serialize};

use super::{check_probability, GroupModel};
use crate::data::Group;
use crate::error::Result;

/// Weibull proportional-hazards model, `F_i(t) = 1 - exp(-(t / lambda_i)^k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeibullPhParams {
    pub k: f64,
    pub lambda1: f64,
    pub lambda0: f64,
}

impl WeibullPhParams {
    pub fn new(k: f64, lambda1: f64, lambda0: f64) -> Self {
        WeibullPhParams { k, lambda1, lambda0 }
    }

    pub fn lambda(&self, group: Group) -> f64 {
        match group {
            Group::Treatment => self.lambda1,
            Group::Control => self.lambda0,
        }
    }

    /// Hazard ratio of treatment versus control, `(lambda0 / lambda1)^k`.
    pub fn hr(&self) -> f64 {
        (self.lambda0 / self.lambda1).powf(self.k)
    }
}

pub fn weibull_ph_cdf(params: &WeibullPhParams, group: Group, t: f64) -> f64 {
    if t < 0.0 {
        return 0.0;
    }
    -(-(t / params.lambda(group)).powf(params.k)).exp_m1()
}

pub fn weibull_ph_quantile(params: &WeibullPhParams, group: Group, u: f64) -> Result<f64> {
    check_probability(u)?;
    Ok(params.lambda(group) * (-(-u).ln_1p()).powf(1.0 / params.k))
}

impl GroupModel for WeibullPhParams {
    fn cdf(&self, group: Group, t: f64) -> f64 {
        weibull_ph_cdf(self, group, t)
    }

    fn quantile(&self, group: Group, u: f64) -> Result<f64> {
        weibull_ph_quantile(self, group, u)
    }

    fn survival(&self, group: Group, t: f64) -> f64 {
        if t < 0.0 {
            return 1.0;
        }
        (-(t / self.lambda(group)).powf(self.k)).exp()
    }

    fn support_end(&self, _group: Group) -> Option<f64> {
        None
    }

    fn mean(&self, group: Group) -> f64 {
        self.lambda(group) * statrs::function::gamma::gamma(1.0 + 1.0 / self.k)
    }
}
