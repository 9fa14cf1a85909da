//! Parametric two-group models: the exponentiated-uniform proportional-risk
//! model, the Weibull proportional-hazards model, their maximum-likelihood
//! and partial-likelihood fits.

mod cox;
mod eu;
pub mod optim;
mod ppr;
mod weibull;

pub use cox::{cox_two_group, cox_two_group_at_level, partial_log_likelihood, CoxFit};
pub use eu::{eu_cdf, eu_log_likelihood, eu_quantile, EuParams};
pub use ppr::{fit_ppr, fit_ppr_at_level, PprFit};
pub use weibull::{weibull_ph_cdf, weibull_ph_quantile, WeibullPhParams};

use crate::data::Group;
use crate::error::Result;

/// Event-time distribution of each arm of a two-group model.
pub trait GroupModel {
    fn cdf(&self, group: Group, t: f64) -> f64;

    fn quantile(&self, group: Group, u: f64) -> Result<f64>;

    fn survival(&self, group: Group, t: f64) -> f64 {
        1.0 - self.cdf(group, t)
    }

    /// Smallest `t` with `cdf(t) == 1`, if the support is bounded.
    fn support_end(&self, group: Group) -> Option<f64>;

    /// Mean event time, `integral of S(t) dt` over `[0, inf)`.
    fn mean(&self, group: Group) -> f64;
}

pub(crate) fn check_probability(u: f64) -> Result<()> {
    if u > 0.0 && u < 1.0 {
        Ok(())
    } else {
        Err(crate::error::Error::InvalidArgument(format!("probability {u} not in (0, 1)")))
    }
}
