//! Percentile bootstrap intervals for the NPPR estimate.
//!
//! Each resample draws `n` rows with replacement from the pooled dataset;
//! group and status travel with the row. Resample `b` uses stream `b` of the
//! bootstrap domain, so results do not depend on thread scheduling.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::estimator::{self, VarianceScale};
use crate::rng::{substream, Domain};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub n_resamples: usize,
    pub level: f64,
    pub seed: u64,
    /// Minimum fraction of resamples that must yield an estimate.
    pub min_success_fraction: f64,
    /// Weighting used for the point estimate and every resample.
    #[serde(default)]
    pub variance_scale: VarianceScale,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            n_resamples: 500,
            level: 0.95,
            seed: 0,
            min_success_fraction: 0.5,
            variance_scale: VarianceScale::Survival,
        }
    }
}

impl BootstrapConfig {
    pub fn new(n_resamples: usize, level: f64, seed: u64) -> Self {
        BootstrapConfig { n_resamples, level, seed, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_resamples < 2 {
            return Err(Error::InvalidArgument("at least 2 bootstrap resamples are required".into()));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::InvalidArgument(format!("confidence level {} not in (0, 1)", self.level)));
        }
        if !(0.0..=1.0).contains(&self.min_success_fraction) {
            return Err(Error::InvalidArgument("minimum success fraction must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    /// Number of replicates the interval is based on (for bootstrap intervals).
    pub n_effective: usize,
}

impl ConfidenceInterval {
    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Empirical quantile of sorted values: the order statistic of rank
/// `ceil(p * m)`, clamped to `[1, m]`.
///
/// The product `p * m` is rounded to 9 decimals before taking the ceiling so
/// that, e.g., `0.025 * 200` lands on rank 5 regardless of the binary
/// representation of 0.025.
pub fn empirical_quantile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty sample");
    let m = sorted.len();
    let scaled = (p * m as f64 * 1e9).round() / 1e9;
    let rank = (scaled.ceil() as usize).clamp(1, m);
    sorted[rank - 1]
}

/// Two-sided percentile interval at `level` from unsorted values.
pub fn percentile_interval(values: &[f64], level: f64) -> ConfidenceInterval {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    ConfidenceInterval {
        lower: empirical_quantile(&sorted, tail),
        upper: empirical_quantile(&sorted, 1.0 - tail),
        level,
        n_effective: sorted.len(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub beta: ConfidenceInterval,
    /// `[exp(-upper_beta), exp(-lower_beta)]`
    pub rr: ConfidenceInterval,
    /// Successful replicate estimates in resample order.
    pub replicates: Vec<f64>,
    pub n_failed: usize,
}

impl BootstrapResult {
    /// Interval at another level from the same replicates.
    pub fn interval_at(&self, level: f64) -> ConfidenceInterval {
        percentile_interval(&self.replicates, level)
    }
}

fn rr_interval(beta: &ConfidenceInterval) -> ConfidenceInterval {
    ConfidenceInterval { lower: (-beta.upper).exp(), upper: (-beta.lower).exp(), ..*beta }
}

/// Draws resample `index` of `data` under `seed`.
pub fn resample(data: &Dataset, seed: u64, index: u64) -> Dataset {
    let rows = data.observations();
    let mut rng = substream(seed, Domain::Bootstrap, index);
    let picked = (0..rows.len()).map(|_| rows[rng.random_range(0..rows.len())]).collect();
    Dataset::from_observations_unchecked(picked)
}

/// Percentile bootstrap interval for the NPPR log relative risk.
///
/// Resamples with an empty (or unusable) event-time set are skipped and
/// counted; the call fails if fewer than `min_success_fraction` succeed.
pub fn percentile_bootstrap(data: &Dataset, config: &BootstrapConfig) -> Result<BootstrapResult> {
    config.validate()?;
    estimator::estimate_with(data, config.variance_scale)?;

    let outcomes: Vec<Option<f64>> = (0..config.n_resamples as u64)
        .into_par_iter()
        .map(|b| {
            let sample = resample(data, config.seed, b);
            estimator::estimate_with(&sample, config.variance_scale).ok().map(|e| e.beta)
        })
        .collect();
    let replicates: Vec<f64> = outcomes.iter().flatten().copied().collect();
    let n_failed = config.n_resamples - replicates.len();
    let needed = (config.min_success_fraction * config.n_resamples as f64).ceil() as usize;
    if replicates.is_empty() || replicates.len() < needed {
        return Err(Error::Bootstrap { n_effective: replicates.len(), n_resamples: config.n_resamples });
    }
    let beta = percentile_interval(&replicates, config.level);
    Ok(BootstrapResult { rr: rr_interval(&beta), beta, replicates, n_failed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::validate_dataset;

    fn small_data() -> Dataset {
        let rows: Vec<(f64, i64, i64)> = (1..=40)
            .map(|i| {
                let t = f64::from(i) * 0.7 + f64::from(i % 3);
                (t, i64::from(i % 4 != 0), i64::from(i % 2))
            })
            .collect();
        validate_dataset(rows).unwrap()
    }

    #[test]
    fn quantile_ranks() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(empirical_quantile(&v, 0.0), 1.0);
        assert_eq!(empirical_quantile(&v, 0.25), 1.0);
        assert_eq!(empirical_quantile(&v, 0.26), 2.0);
        assert_eq!(empirical_quantile(&v, 1.0), 4.0);
        let v: Vec<f64> = (1..=200).map(f64::from).collect();
        assert_eq!(empirical_quantile(&v, 0.025), 5.0);
        assert_eq!(empirical_quantile(&v, 0.975), 195.0);
        let v: Vec<f64> = (1..=500).map(f64::from).collect();
        assert_eq!(empirical_quantile(&v, 0.025), 13.0);
        assert_eq!(empirical_quantile(&v, 0.975), 488.0);
    }

    #[test]
    fn two_resamples_span_min_to_max() {
        let data = small_data();
        let res = percentile_bootstrap(&data, &BootstrapConfig::new(2, 0.95, 11)).unwrap();
        assert_eq!(res.replicates.len(), 2);
        let lo = res.replicates.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = res.replicates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!((res.beta.lower, res.beta.upper), (lo, hi));
        assert_eq!(res.rr.lower, (-hi).exp());
        assert_eq!(res.rr.upper, (-lo).exp());
    }

    #[test]
    fn identical_groups_cover_zero() {
        let base: Vec<(f64, i64, i64)> = (1..=30).map(|i| (f64::from(i), i64::from(i % 5 != 0), 0)).collect();
        let rows: Vec<(f64, i64, i64)> = base.iter().flat_map(|&(t, s, _)| [(t, s, 0), (t, s, 1)]).collect();
        let data = validate_dataset(rows).unwrap();
        let res = percentile_bootstrap(&data, &BootstrapConfig::new(200, 0.95, 3)).unwrap();
        assert!(res.beta.contains(0.0), "{:?}", res.beta);
    }

    #[test]
    fn deterministic_and_nested() {
        let data = small_data();
        let cfg = BootstrapConfig::new(100, 0.95, 42);
        let a = percentile_bootstrap(&data, &cfg).unwrap();
        let b = percentile_bootstrap(&data, &cfg).unwrap();
        assert_eq!(a, b);
        let narrow = a.interval_at(0.90);
        assert!(a.beta.lower <= narrow.lower && narrow.upper <= a.beta.upper);
    }

    #[test]
    fn rejects_bad_config() {
        let data = small_data();
        assert!(percentile_bootstrap(&data, &BootstrapConfig::new(1, 0.95, 0)).is_err());
        assert!(percentile_bootstrap(&data, &BootstrapConfig::new(10, 1.0, 0)).is_err());
    }

    #[test]
    fn too_many_failures_is_an_error() {
        // one control event before every treatment event; most resamples fail
        let rows = vec![(1.0, 1, 0), (2.0, 1, 1), (3.0, 0, 0), (1.5, 1, 1), (4.0, 1, 0)];
        let data = validate_dataset(rows).unwrap();
        let cfg = BootstrapConfig { min_success_fraction: 1.0, ..BootstrapConfig::new(50, 0.95, 5) };
        assert!(estimator::estimate(&data).is_ok());
        match percentile_bootstrap(&data, &cfg) {
            Err(Error::Bootstrap { n_effective, n_resamples }) => {
                assert!(n_effective < 50);
                assert_eq!(n_resamples, 50);
            }
            other => panic!("unexpected {other:?}"),
        }
        let lenient = BootstrapConfig { min_success_fraction: 0.0, ..cfg };
        let res = percentile_bootstrap(&data, &lenient).unwrap();
        assert_eq!(res.replicates.len() + res.n_failed, 50);
        assert!(res.n_failed > 0);
    }
}
