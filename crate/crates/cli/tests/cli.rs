use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const SYNTHETIC: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/data/case_study_synthetic.csv");

fn nppr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nppr")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn small_eu_scenario() -> &'static str {
    r#"{"model": "PPR_EU", "params": {"alpha": 0.859, "theta1": 0.005, "theta0": 0.009},
        "effect_beta": 0.5, "censor_rate": 0.3, "n_participants": 60, "seed": 3}"#
}

#[test]
fn fit_json_on_bundled_data() {
    let out = nppr(&["fit", "--data", SYNTHETIC, "--format", "json", "--bootstrap", "50", "--seed", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let beta = v["beta"].as_f64().unwrap();
    assert!((beta - 0.2998).abs() < 1e-3, "{beta}");
    assert!((v["rr"].as_f64().unwrap() - (-beta).exp()).abs() < 1e-12);
    assert_eq!(v["n_treatment"], 2373);
    assert_eq!(v["events_control"], 500);
    let lo = v["ci_beta"]["lower"].as_f64().unwrap();
    let hi = v["ci_beta"]["upper"].as_f64().unwrap();
    assert!(lo < beta && beta < hi);
    assert_eq!(v["variance_scale"], "survival");

    // same seed, same output
    let again = nppr(&["fit", "--data", SYNTHETIC, "--format", "json", "--bootstrap", "50", "--seed", "1"]);
    assert_eq!(stdout(&again), stdout(&out));
}

#[test]
fn fit_table_and_log_scale() {
    let out = nppr(&["fit", "--data", SYNTHETIC, "--variance-scale", "log-survival", "--format", "csv"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("key,value"), "{text}");
    assert!(text.contains("variance_scale,log_survival"));
    let table = nppr(&["fit", "--data", SYNTHETIC]);
    assert!(table.status.success());
    assert!(stdout(&table).contains("beta"));
}

#[test]
fn missing_column_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "bad.csv", "time,group\n1.0,1\n2.0,0\n");
    let out = nppr(&["fit", "--data", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.starts_with("error: "), "{err}");
    assert!(err.contains("status"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn invalid_row_and_missing_file_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "neg.csv", "time,status,group\n1.0,1,1\n-2.0,1,0\n");
    assert_eq!(nppr(&["fit", "--data", path.to_str().unwrap()]).status.code(), Some(2));
    let gone = dir.path().join("nope.csv");
    assert_eq!(nppr(&["fit", "--data", gone.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn empty_time_set_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "disjoint.csv", "time,status,group\n1,1,1\n2,1,1\n5,1,0\n6,1,0\n");
    let out = nppr(&["fit", "--data", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty"));
}

#[test]
fn parametric_fits() {
    let out = nppr(&["ppr-fit", "--data", SYNTHETIC, "--format", "csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("converged,true"), "{text}");
    assert!(text.contains("neg_log_rr,"));

    let out = nppr(&["cox", "--data", SYNTHETIC, "--format", "json"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let hr = v["hr"].as_f64().unwrap();
    assert!((hr - 0.748).abs() < 0.01, "{hr}");
}

#[test]
fn simulate_writes_replicates() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(dir.path(), "s.json", small_eu_scenario());
    let out_dir = dir.path().join("out");
    let out = nppr(&["simulate", "--scenario", scenario.to_str().unwrap(), "--reps", "3", "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for r in 0..3 {
        let text = fs::read_to_string(out_dir.join(format!("replicate_{r:04}.csv"))).unwrap();
        assert!(text.starts_with("time,status,group"));
        assert_eq!(text.lines().count(), 61);
    }
    let meta: Value = serde_json::from_str(&fs::read_to_string(out_dir.join("scenario.json")).unwrap()).unwrap();
    assert!(meta["scenarios"][0]["censor_cmax"].as_f64().unwrap() > 0.0);

    // simulated output feeds straight back into fit
    let rep = out_dir.join("replicate_0000.csv");
    assert!(nppr(&["fit", "--data", rep.to_str().unwrap()]).status.success());
}

#[test]
fn small_study_formats() {
    let dir = tempfile::tempdir().unwrap();
    let grid = write(dir.path(), "g.json", &format!(r#"{{"scenarios": [{}]}}"#, small_eu_scenario()));
    let g = grid.to_str().unwrap();

    let out = nppr(&["study", "--grid", g, "--reps", "20", "--format", "csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 2, "{text}");

    let out = nppr(&["study", "--grid", g, "--reps", "20", "--coverage", "--bootstrap", "30", "--format", "json"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let first = &v[0];
    assert_eq!(first["n_runs"], 20);
    let cov = first["coverage_nppr"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&cov));
}

#[test]
fn plotdata_headers() {
    let expected = [
        ("cdf", "group,time,cdf,greenwood_var,at_risk,events"),
        ("beta_t", "time,multiplicity,beta_t,beta"),
        ("weights", "time,multiplicity,weight_var,weight"),
        ("nnt", "time,rd,nnt"),
    ];
    for (series, header) in expected {
        let out = nppr(&["plotdata", "--data", SYNTHETIC, "--series", series]);
        assert!(out.status.success(), "{series}");
        let text = stdout(&out);
        assert_eq!(text.lines().next(), Some(header));
        assert!(text.lines().count() > 10);
    }
}

#[test]
fn bad_arguments_are_rejected() {
    let out = nppr(&["fit", "--data", SYNTHETIC, "--series", "cdf"]);
    assert!(!out.status.success());
    let out = nppr(&["plotdata", "--data", SYNTHETIC, "--series", "hazard"]);
    assert!(!out.status.success());
}
