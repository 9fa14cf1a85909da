//! Synthetic two-group datasets under proportional-risk (exponentiated
//! uniform) and proportional-hazards (Weibull) models, with uniform
//! censoring calibrated to a target censoring rate.

use rand::distr::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Group, Observation};
use crate::error::{Error, Result};
use crate::parametric::{EuParams, GroupModel, WeibullPhParams};
use crate::quadrature::adaptive_simpson;
use crate::rng::{substream, Domain};

/// Data-generating model of a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", content = "params", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ModelSpec {
    PprEu(EuParams),
    WeibullPh(WeibullPhParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ModelKind {
    PprEu,
    WeibullPh,
}

impl ModelSpec {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelSpec::PprEu(_) => ModelKind::PprEu,
            ModelSpec::WeibullPh(_) => ModelKind::WeibullPh,
        }
    }
}

impl GroupModel for ModelSpec {
    fn cdf(&self, group: Group, t: f64) -> f64 {
        match self {
            ModelSpec::PprEu(p) => p.cdf(group, t),
            ModelSpec::WeibullPh(p) => p.cdf(group, t),
        }
    }

    fn quantile(&self, group: Group, u: f64) -> Result<f64> {
        match self {
            ModelSpec::PprEu(p) => p.quantile(group, u),
            ModelSpec::WeibullPh(p) => p.quantile(group, u),
        }
    }

    fn survival(&self, group: Group, t: f64) -> f64 {
        match self {
            ModelSpec::PprEu(p) => p.survival(group, t),
            ModelSpec::WeibullPh(p) => p.survival(group, t),
        }
    }

    fn support_end(&self, group: Group) -> Option<f64> {
        match self {
            ModelSpec::PprEu(p) => p.support_end(group),
            ModelSpec::WeibullPh(p) => p.support_end(group),
        }
    }

    fn mean(&self, group: Group) -> f64 {
        match self {
            ModelSpec::PprEu(p) => p.mean(group),
            ModelSpec::WeibullPh(p) => p.mean(group),
        }
    }
}

/// Shared shape and control-arm parameters of the reference grid.
pub const EU_ALPHA: f64 = 0.859;
pub const EU_THETA0: f64 = 0.009;
pub const WEIBULL_K: f64 = 0.916;
pub const WEIBULL_LAMBDA0: f64 = 88.296;

/// `(beta, theta1, lambda1)` rows of the reference parameter table, in its
/// row order. The `theta1` column is rounded to three decimals; reference
/// scenarios use the unrounded `theta0 * exp(-beta / alpha)`, whose relative
/// risk is exactly `exp(-beta)`.
pub const REFERENCE_EFFECTS: [(f64, f64, f64); 5] = [
    (0.0, 0.009, 88.296),
    (0.5, 0.005, 145.575),
    (0.25, 0.007, 113.374),
    (-0.25, 0.012, 68.765),
    (-0.5, 0.016, 53.554),
];
/// Treatment-arm EU scale giving `-log RR = beta` against the reference control arm.
pub fn exact_theta1(beta: f64) -> f64 {
    EU_THETA0 * (-beta / EU_ALPHA).exp()
}

pub const REFERENCE_CENSOR_RATES: [f64; 3] = [0.30, 0.50, 0.70];
pub const REFERENCE_SIZES: [usize; 3] = [500, 100, 50];

/// One cell of a simulation grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(flatten)]
    pub model: ModelSpec,
    /// True effect on the `-log RR` scale (the nominal log HR for PH data).
    pub effect_beta: f64,
    pub censor_rate: f64,
    pub n_participants: usize,
    /// Upper bound of the uniform censoring distribution; calibrated from
    /// `censor_rate` when absent.
    #[serde(default)]
    pub censor_cmax: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

impl Scenario {
    /// Scenario from the reference parameter table.
    pub fn reference(kind: ModelKind, effect_beta: f64, censor_rate: f64, n_participants: usize, seed: u64) -> Result<Scenario> {
        let &(_, _, lambda1) = REFERENCE_EFFECTS
            .iter()
            .find(|row| row.0 == effect_beta)
            .ok_or_else(|| Error::InvalidArgument(format!("no reference parameters for effect {effect_beta}")))?;
        let model = match kind {
            ModelKind::PprEu => ModelSpec::PprEu(EuParams::new(EU_ALPHA, exact_theta1(effect_beta), EU_THETA0)),
            ModelKind::WeibullPh => ModelSpec::WeibullPh(WeibullPhParams::new(WEIBULL_K, lambda1, WEIBULL_LAMBDA0)),
        };
        Ok(Scenario { model, effect_beta, censor_rate, n_participants, censor_cmax: None, seed })
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_participants == 0 {
            return Err(Error::InvalidArgument("scenario needs at least one participant".into()));
        }
        if !(self.censor_rate > 0.0 && self.censor_rate < 1.0) {
            return Err(Error::InvalidArgument(format!("censoring rate {} not in (0, 1)", self.censor_rate)));
        }
        let positive = |v: f64| v.is_finite() && v > 0.0;
        let ok = match self.model {
            ModelSpec::PprEu(p) => p.is_valid(),
            ModelSpec::WeibullPh(p) => [p.k, p.lambda1, p.lambda0].into_iter().all(positive),
        };
        if !ok {
            return Err(Error::InvalidArgument("model parameters must be positive and finite".into()));
        }
        if let Some(c) = self.censor_cmax {
            if !positive(c) {
                return Err(Error::InvalidArgument(format!("censoring bound {c} must be positive")));
            }
        }
        Ok(())
    }

    /// Censoring bound, calibrated if not set.
    pub fn cmax(&self) -> Result<f64> {
        match self.censor_cmax {
            Some(c) => Ok(c),
            None => calibrate_censoring(&self.model, self.censor_rate),
        }
    }

    /// Copy with `censor_cmax` filled in.
    pub fn calibrated(&self) -> Result<Scenario> {
        self.validate()?;
        Ok(Scenario { censor_cmax: Some(self.cmax()?), ..self.clone() })
    }
}

/// The full 90-cell reference grid (both models x 5 effects x 3 censoring
/// rates x 3 sizes) in table row order. Cell `i` gets seed `base_seed + i`.
pub fn reference_grid(base_seed: u64) -> Vec<Scenario> {
    let mut out = Vec::with_capacity(90);
    for kind in [ModelKind::PprEu, ModelKind::WeibullPh] {
        for &(beta, _, _) in &REFERENCE_EFFECTS {
            for &rate in &REFERENCE_CENSOR_RATES {
                for &n in &REFERENCE_SIZES {
                    let seed = base_seed.wrapping_add(out.len() as u64);
                    out.push(Scenario::reference(kind, beta, rate, n, seed).expect("reference effect"));
                }
            }
        }
    }
    out
}

/// `P(C < T)` for `C ~ Uniform(0, cmax)` and `T` drawn from the 50/50 mixture
/// of the two arms, by adaptive quadrature of `(1/cmax) * integral S(x) dx`.
pub fn censoring_probability<M: GroupModel>(model: &M, cmax: f64) -> f64 {
    let per_group = |group: Group| {
        let upper = model.support_end(group).map_or(cmax, |end| end.min(cmax));
        let tol = 1e-11 * cmax;
        adaptive_simpson(&|x| model.survival(group, x), 0.0, upper, tol) / cmax
    };
    0.5 * (per_group(Group::Treatment) + per_group(Group::Control))
}

/// Uniform censoring bound achieving `target_rate`, found by bisection on the
/// (strictly decreasing) censoring probability.
pub fn calibrate_censoring<M: GroupModel>(model: &M, target_rate: f64) -> Result<f64> {
    let unreachable = |reason: &str| Error::Calibration { target: target_rate, reason: reason.into() };
    if !(target_rate > 0.0 && target_rate < 1.0) {
        return Err(unreachable("rate must lie strictly between 0 and 1"));
    }
    let scale = 0.5 * (model.mean(Group::Treatment) + model.mean(Group::Control));
    if !(scale.is_finite() && scale > 0.0) {
        return Err(unreachable("event-time distribution has no finite positive mean"));
    }
    let mut lo = scale;
    let mut hi = scale;
    let mut guard = 0;
    while censoring_probability(model, lo) <= target_rate {
        lo /= 2.0;
        guard += 1;
        if guard > 200 {
            return Err(unreachable("censoring probability never exceeds the target"));
        }
    }
    guard = 0;
    while censoring_probability(model, hi) >= target_rate {
        hi *= 2.0;
        guard += 1;
        if guard > 200 {
            return Err(unreachable("censoring probability never falls below the target"));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if censoring_probability(model, mid) > target_rate {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    let cmax = 0.5 * (lo + hi);
    let achieved = censoring_probability(model, cmax);
    if (achieved - target_rate).abs() >= 1e-4 {
        return Err(unreachable(&format!("bisection stalled at rate {achieved}")));
    }
    Ok(cmax)
}

/// Replicate `replicate` of `scenario`.
///
/// Per participant, in order: group from a uniform draw (treatment when
/// below 1/2), event time by inverse transform, censoring time uniform on
/// `(0, cmax)`. Status is 1 when the event time does not exceed the
/// censoring time.
pub fn simulate_dataset(scenario: &Scenario, replicate: u64) -> Result<Dataset> {
    scenario.validate()?;
    let cmax = scenario.cmax()?;
    let mut rng = substream(scenario.seed, Domain::Simulation, replicate);
    let mut rows = Vec::with_capacity(scenario.n_participants);
    for _ in 0..scenario.n_participants {
        let group = if rng.random::<f64>() < 0.5 { Group::Treatment } else { Group::Control };
        let event_time = scenario.model.quantile(group, rng.sample(Open01))?;
        let censor_time = cmax * rng.sample::<f64, _>(Open01);
        rows.push(Observation::new(event_time.min(censor_time), event_time <= censor_time, group));
    }
    Ok(Dataset::from_observations_unchecked(rows))
}
