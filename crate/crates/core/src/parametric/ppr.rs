//! Maximum-likelihood fit of the parametric proportional-risk (PPR) model.
//!
//! The exponentiated-uniform likelihood is maximized over
//! `(log alpha, log theta1, log theta0)` with Nelder–Mead. Each `theta` is
//! capped at the reciprocal of its group's largest observed time, the edge of
//! the region where the likelihood is positive. The interval for `-log RR` uses the multivariate delta method on
//! the inverse of the finite-difference observed information.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::eu::{log_likelihood_on_log_scale, EuParams};
use super::optim::{hessian, nelder_mead, quadratic_form, spd_inverse, NelderMeadOptions};
use crate::bootstrap::ConfidenceInterval;
use crate::data::{Dataset, Group};

const HESSIAN_STEP: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PprFit {
    pub params: EuParams,
    /// `-log RR = alpha (log theta0 - log theta1)`, oriented like the NPPR beta.
    pub neg_log_rr: f64,
    /// `(theta1 / theta0)^alpha`
    pub rr: f64,
    /// Delta-method interval for `neg_log_rr`; absent when the observed
    /// information is not positive definite.
    pub ci_neg_log_rr: Option<ConfidenceInterval>,
    pub ci_rr: Option<ConfidenceInterval>,
    pub se_neg_log_rr: Option<f64>,
    pub converged: bool,
    /// Whether the fitted scale sits on the bound `1 / max observed time` of
    /// its group, where it is treated as fixed in the observed information.
    pub theta1_at_bound: bool,
    pub theta0_at_bound: bool,
    pub loglik: f64,
    pub iterations: usize,
    /// Why the fit is flagged as not converged.
    pub reason: Option<String>,
}

/// Fits the PPR model with a 95% delta-method interval.
pub fn fit_ppr(data: &Dataset) -> PprFit {
    fit_ppr_at_level(data, 0.95)
}

pub fn fit_ppr_at_level(data: &Dataset, level: f64) -> PprFit {
    let max_t1 = data.max_time(Group::Treatment);
    let max_t0 = data.max_time(Group::Control);
    let start_params = EuParams {
        alpha: 1.0,
        theta1: max_t1.map_or(1.0, |t| 0.9 / t),
        theta0: max_t0.map_or(1.0, |t| 0.9 / t),
    };
    let failed = |reason: &str| PprFit {
        params: start_params,
        neg_log_rr: f64::NAN,
        rr: f64::NAN,
        ci_neg_log_rr: None,
        ci_rr: None,
        se_neg_log_rr: None,
        converged: false,
        theta1_at_bound: false,
        theta0_at_bound: false,
        loglik: f64::NEG_INFINITY,
        iterations: 0,
        reason: Some(reason.to_string()),
    };
    let (Some(max_t1), Some(max_t0)) = (max_t1, max_t0) else {
        return failed("a group has no observations");
    };
    for group in [Group::Treatment, Group::Control] {
        if data.event_count(group) == 0 {
            return failed(&format!("no events in the {group} group"));
        }
    }

    // x = (log alpha, eta1, eta0); log theta_g = min(eta_g, -log max_t_g)
    let caps = [-max_t1.ln(), -max_t0.ln()];
    let log_thetas = move |x: &[f64]| [x[1].min(caps[0]), x[2].min(caps[1])];
    let objective = |x: &[f64]| {
        let [lt1, lt0] = log_thetas(x);
        -log_likelihood_on_log_scale(data, x[0].exp(), [lt0, lt1])
    };
    let start = [
        start_params.alpha.ln(),
        start_params.theta1.ln(),
        start_params.theta0.ln(),
    ];
    let options = NelderMeadOptions::default();
    let first = nelder_mead(objective, &start, &options);
    // restart from the best vertex with a fresh simplex
    let second = nelder_mead(objective, &first.x, &NelderMeadOptions { step: 0.02, ..options });
    let best = if second.value <= first.value { second.clone() } else { first.clone() };
    let iterations = first.iterations + second.iterations;

    let [lt1, lt0] = log_thetas(&best.x);
    let at_bound = [best.x[1] >= caps[0], best.x[2] >= caps[1]];
    let x_hat = [best.x[0], lt1, lt0];
    let alpha = x_hat[0].exp();
    let params = EuParams { alpha, theta1: lt1.exp(), theta0: lt0.exp() };
    let neg_log_rr = alpha * (lt0 - lt1);
    let rr = (-neg_log_rr).exp();
    let loglik = -best.value;

    let mut fit = PprFit {
        params,
        neg_log_rr,
        rr,
        ci_neg_log_rr: None,
        ci_rr: None,
        se_neg_log_rr: None,
        converged: false,
        theta1_at_bound: at_bound[0],
        theta0_at_bound: at_bound[1],
        loglik,
        iterations,
        reason: None,
    };
    if !loglik.is_finite() {
        fit.reason = Some("likelihood is zero at every parameter tried".into());
        return fit;
    }
    if !(first.converged && second.converged) {
        fit.reason = Some("simplex did not converge within the iteration limit".into());
        return fit;
    }

    // Observed information over the interior parameters. A scale parameter
    // sitting on its support bound is held fixed there.
    let free: Vec<usize> = (0..3).filter(|&i| i == 0 || !at_bound[i - 1]).collect();
    let restricted = |y: &[f64]| {
        let mut x = x_hat;
        for (&i, &v) in free.iter().zip(y) {
            x[i] = v;
        }
        objective(&x)
    };
    let y_hat: Vec<f64> = free.iter().map(|&i| x_hat[i]).collect();
    let info = hessian(restricted, &y_hat, HESSIAN_STEP);
    let Some(cov) = spd_inverse(&info) else {
        fit.reason = Some("observed information is not positive definite".into());
        return fit;
    };
    let full_gradient = [neg_log_rr, -alpha, alpha];
    let gradient: Vec<f64> = free.iter().map(|&i| full_gradient[i]).collect();
    let var = quadratic_form(&cov, &gradient);
    if !(var > 0.0 && var.is_finite()) {
        fit.reason = Some("delta-method variance is not positive".into());
        return fit;
    }
    let se = var.sqrt();
    let z = Normal::standard().inverse_cdf(0.5 + level / 2.0);
    let ci = ConfidenceInterval { lower: neg_log_rr - z * se, upper: neg_log_rr + z * se, level, n_effective: data.len() };
    fit.ci_rr = Some(ConfidenceInterval { lower: (-ci.upper).exp(), upper: (-ci.lower).exp(), ..ci });
    fit.ci_neg_log_rr = Some(ci);
    fit.se_neg_log_rr = Some(se);
    fit.converged = true;
    fit
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parametric::{eu_log_likelihood, eu_quantile, GroupModel};
    use crate::data::Observation;
    use rand::{Rng, SeedableRng};

    fn simulate_eu(params: &EuParams, n: usize, cmax: f64, seed: u64) -> Dataset {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let rows = (0..n)
            .map(|i| {
                let group = if i % 2 == 0 { Group::Treatment } else { Group::Control };
                let t = eu_quantile(params, group, rng.random_range(1e-12..1.0)).unwrap();
                let c = cmax * rng.random_range(1e-12..1.0);
                Observation::new(t.min(c), t <= c, group)
            })
            .collect();
        Dataset::from_observations(rows).unwrap()
    }

    #[test]
    fn rr_identity_at_fitted_values() {
        let truth = EuParams::new(0.859, 0.005, 0.009);
        let data = simulate_eu(&truth, 400, 60.0, 1);
        let fit = fit_ppr(&data);
        assert!(fit.converged, "{:?}", fit.reason);
        assert_eq!(fit.rr, (fit.params.theta1 / fit.params.theta0).powf(fit.params.alpha));
        let ci = fit.ci_neg_log_rr.unwrap();
        assert!(ci.lower < fit.neg_log_rr && fit.neg_log_rr < ci.upper);
        // heavy censoring keeps the optimum interior; estimate should be near truth
        assert!((fit.neg_log_rr - truth.neg_log_rr()).abs() < 0.4, "{}", fit.neg_log_rr);
    }

    #[test]
    fn identical_groups_give_unit_rr() {
        let base = simulate_eu(&EuParams::new(0.9, 0.01, 0.01), 150, 50.0, 2);
        let rows: Vec<Observation> = base
            .iter()
            .flat_map(|o| [Observation { group: Group::Treatment, ..*o }, Observation { group: Group::Control, ..*o }])
            .collect();
        let fit = fit_ppr(&Dataset::from_observations(rows).unwrap());
        assert!((fit.rr - 1.0).abs() < 1e-3, "{}", fit.rr);
    }

    #[test]
    fn group_relabeling_inverts_rr() {
        let data = simulate_eu(&EuParams::new(0.859, 0.007, 0.009), 300, 70.0, 3);
        let a = fit_ppr(&data);
        let b = fit_ppr(&data.swap_groups());
        assert!((a.rr * b.rr - 1.0).abs() < 1e-3, "{} {}", a.rr, b.rr);
    }

    #[test]
    fn no_events_in_group_is_flagged() {
        let rows = vec![
            Observation::new(1.0, true, Group::Treatment),
            Observation::new(2.0, false, Group::Control),
        ];
        let fit = fit_ppr(&Dataset::from_observations(rows).unwrap());
        assert!(!fit.converged);
        assert!(fit.reason.unwrap().contains("control"));
    }

    #[test]
    fn loglik_at_optimum_beats_truth() {
        let truth = EuParams::new(0.859, 0.005, 0.009);
        let data = simulate_eu(&truth, 300, 80.0, 4);
        let fit = fit_ppr(&data);
        assert!(fit.loglik >= eu_log_likelihood(&data, &truth));
        assert!(truth.support_end(Group::Treatment).unwrap() > 0.0);
    }

    #[test]
    fn boundary_optimum_still_yields_interval() {
        // follow-up long enough that both supports are fully observed
        let truth = EuParams::new(0.859, 0.005, 0.009);
        let data = simulate_eu(&truth, 500, 400.0, 5);
        let fit = fit_ppr(&data);
        assert!(fit.theta0_at_bound, "{fit:?}");
        assert!(fit.converged, "{:?}", fit.reason);
        let bound = 1.0 / data.max_time(Group::Control).unwrap();
        assert!((fit.params.theta0 / bound - 1.0).abs() < 1e-12);
        assert!((fit.neg_log_rr - truth.neg_log_rr()).abs() < 0.2, "{}", fit.neg_log_rr);
        assert!(fit.se_neg_log_rr.unwrap() < 0.2);
    }
}
