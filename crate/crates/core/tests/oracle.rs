mod common;

use common::{continuous_dataset_strategy, dataset_strategy, oracle_km, oracle_nppr};
use nppr::estimator::{self, VarianceScale};
use nppr::km::kaplan_meier_from;
use nppr::{validate_dataset, Dataset, EstimationFailure};
use proptest::prelude::*;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-10 * (1.0 + a.abs().max(b.abs()))
}

fn data(rows: &[(f64, i64, i64)]) -> Dataset {
    validate_dataset(rows.iter().copied()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, ..ProptestConfig::default() })]

    #[test]
    fn km_matches_recount(rows in prop::collection::vec((1u8..=10, prop::bool::ANY), 1..40)) {
        let rows: Vec<(f64, bool)> = rows.into_iter().map(|(t, e)| (f64::from(t), e)).collect();
        let curve = kaplan_meier_from(rows.clone());
        let steps = oracle_km(&rows);
        prop_assert_eq!(curve.len(), steps.len());
        for (i, s) in steps.iter().enumerate() {
            prop_assert_eq!(curve.event_times[i], s.time);
            prop_assert_eq!(curve.at_risk[i], s.at_risk);
            prop_assert_eq!(curve.events[i], s.events);
            prop_assert!(close(curve.survival[i], s.survival));
            match (curve.greenwood_var[i], s.greenwood_var) {
                (Some(a), Some(b)) => prop_assert!(close(a, b), "{a} vs {b}"),
                (a, b) => prop_assert_eq!(a.is_some(), b.is_some()),
            }
        }
    }

    #[test]
    fn nppr_matches_recount_with_ties(data in dataset_strategy(40)) {
        match (estimator::estimate(&data), oracle_nppr(&data)) {
            (Ok(e), Some(b)) => prop_assert!(close(e.beta, b), "{} vs {b}", e.beta),
            (Err(_), None) => {}
            (a, b) => prop_assert!(false, "{a:?} vs {b:?}"),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, ..ProptestConfig::default() })]

    #[test]
    fn nppr_matches_recount_continuous(data in continuous_dataset_strategy(2..150)) {
        match (estimator::estimate(&data), oracle_nppr(&data)) {
            (Ok(e), Some(b)) => prop_assert!(close(e.beta, b)),
            (Err(_), None) => {}
            (a, b) => prop_assert!(false, "{a:?} vs {b:?}"),
        }
    }
}

#[test]
fn identical_arms_give_zero() {
    let rows: Vec<(f64, i64, i64)> = (1..=6).flat_map(|t| [(f64::from(t), 1, 1), (f64::from(t), 1, 0)]).collect();
    // the last time has n = d in both arms and is dropped
    let e = estimator::estimate(&data(&rows)).unwrap();
    assert_eq!(e.beta, 0.0);
    assert_eq!(e.rr, 1.0);
}

#[test]
fn disjoint_event_ranges_fail() {
    let rows = [(1.0, 1, 1), (2.0, 1, 1), (5.0, 1, 0), (6.0, 1, 0), (9.0, 0, 1)];
    assert_eq!(estimator::estimate(&data(&rows)), Err(EstimationFailure::EmptyTimeSet));
}

#[test]
fn no_events_in_one_arm_fails() {
    let rows = [(1.0, 1, 1), (2.0, 1, 1), (5.0, 0, 0), (6.0, 0, 0)];
    assert_eq!(estimator::estimate(&data(&rows)), Err(EstimationFailure::EmptyTimeSet));
}

#[test]
fn cdf_ratio_of_two() {
    // treatment: 4 at risk, one event at t=1 then censored; control: two events at t=1
    let rows = [
        (1.0, 1, 1),
        (3.0, 0, 1),
        (3.0, 0, 1),
        (3.0, 0, 1),
        (1.0, 1, 0),
        (1.0, 1, 0),
        (3.0, 0, 0),
        (3.0, 0, 0),
    ];
    let a = estimator::analyze(&data(&rows)).unwrap();
    // F1 = 1/4, F0 = 1/2
    assert_eq!(a.time_set.times, vec![1.0, 1.0, 1.0]);
    assert!((a.estimate.beta - 2f64.ln()).abs() < 1e-14);
    let p = a.series.points[0];
    let omega = (0.75 * 0.25 / 4.0) / 0.0625 + (0.25 / 4.0) / 0.25;
    assert!((p.weight_var - omega).abs() < 1e-14, "{}", p.weight_var);
    // F0 = 1/2 so RD = (1 - 1/2) / 2
    let rd = a.risk_difference();
    assert!((rd.rd[0] - 0.25).abs() < 1e-14);
    assert_eq!(rd.nnt[0], Some(4.0));
}

#[test]
fn log_scale_weight_by_hand() {
    let rows = [
        (1.0, 1, 1),
        (3.0, 0, 1),
        (3.0, 0, 1),
        (3.0, 0, 1),
        (1.0, 1, 0),
        (1.0, 1, 0),
        (3.0, 0, 0),
        (3.0, 0, 0),
    ];
    let a = estimator::analyze_with(&data(&rows), VarianceScale::LogSurvival).unwrap();
    // Greenwood sums d / (n (n - d)): 1/12 and 2/8
    let omega = (1.0 / 12.0) / 0.0625 + (2.0 / 8.0) / 0.25;
    assert!((a.series.points[0].weight_var - omega).abs() < 1e-14);
    assert!((a.estimate.beta - 2f64.ln()).abs() < 1e-14);
}
