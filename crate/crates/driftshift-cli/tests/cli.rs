//! Contract tests for the command-line surface: file schemas, exit codes,
//! and determinism of the emitted artefacts.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_driftshift"))
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, body).unwrap();
    path
}

fn small_config(out: &Path) -> String {
    format!(
        r#"{{
  "schema_version": 1,
  "scenario": {{"preset": "slow-sine", "beta": 1.0}},
  "estimator": {{"delta": 0.1, "beta_bar": 1}},
  "sweep": {{"n": [200], "t": [101], "seeds": [1, 2, 3]}},
  "outputs": "{}"
}}"#,
        out.display()
    )
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().unwrap();
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

#[test]
fn run_writes_one_csv_per_seed_plus_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let config = write_config(tmp.path(), &small_config(&out_dir));
    run_ok(&["run", "--config", config.to_str().unwrap(), "--jobs", "2"]);
    let mut csvs: Vec<String> = std::fs::read_dir(&out_dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".csv"))
        .collect();
    csvs.sort();
    assert_eq!(
        csvs,
        vec![
            "regret_n200_T101_seed1.csv",
            "regret_n200_T101_seed2.csv",
            "regret_n200_T101_seed3.csv"
        ]
    );
    assert!(out_dir.join("summary.json").exists());
    assert!(out_dir.join("manifest.json").exists());
    // no plot unless requested
    assert!(!out_dir.join("plot.gp").exists());

    let text = std::fs::read_to_string(out_dir.join(&csvs[0])).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,test_error,bayes_error,excess,pi_true,pi_hat,q_hat"
    );
    assert_eq!(text.lines().count(), 101); // header + t in 1..=100
    assert!(!text.contains('\r'));

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["schema_version"], 1);
    assert_eq!(manifest["seeds"].as_array().unwrap().len(), 3);
}

#[test]
fn emit_plots_writes_a_script() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let config = write_config(tmp.path(), &small_config(&out_dir));
    run_ok(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--emit-plots",
        "--seeds",
        "7",
    ]);
    let script = std::fs::read_to_string(out_dir.join("plot.gp")).unwrap();
    assert!(script.contains("regret_n200_T101_seed7.csv"));
    // the seeds override replaced the sweep list
    assert!(!out_dir.join("regret_n200_T101_seed1.csv").exists());
}

#[test]
fn malformed_config_exits_2_with_position() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), "{\n  \"schema_version\": oops\n}");
    let out = bin()
        .args(["run", "--config", config.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2"), "{err}");

    // semantically invalid field
    let bad = small_config(Path::new("out")).replace("\"delta\": 0.1", "\"delta\": 0.0");
    let config = write_config(tmp.path(), &bad);
    let out = bin()
        .args(["run", "--config", config.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("delta"));
}

#[test]
fn unwritable_output_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    // a path below a regular file can never become a directory
    let blocker = tmp.path().join("blocker");
    std::fs::write(&blocker, "x").unwrap();
    let out_dir = blocker.join("out");
    let config = write_config(tmp.path(), &small_config(&out_dir));
    let out = bin()
        .args(["run", "--config", config.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn estimate_pi_schema_and_convergence_shape() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let body = format!(
        r#"{{
  "schema_version": 1,
  "scenario": {{"preset": "stationary"}},
  "estimator": {{"delta": 0.1, "beta_bar": 1}},
  "sweep": {{"n": [400], "t": [401], "seeds": [5]}},
  "outputs": "{}"
}}"#,
        out_dir.display()
    );
    let config = write_config(tmp.path(), &body);
    run_ok(&["estimate-pi", "--config", config.to_str().unwrap()]);
    let text = std::fs::read_to_string(out_dir.join("pi_n400_T401_seed5.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,pi_true,pi_hat,q_hat,abs_err");
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 400);
    // constant trajectory: late-quartile error below early-quartile error
    let quarter = rows.len() / 4;
    let head: f64 = rows[..quarter].iter().map(|r| r[4]).sum::<f64>() / quarter as f64;
    let tail: f64 = rows[rows.len() - quarter..]
        .iter()
        .map(|r| r[4])
        .sum::<f64>()
        / quarter as f64;
    assert!(tail < head, "abs_err head {head} vs tail {tail}");
}

#[test]
fn estimate_eta_grid_and_symmetry() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    // identical class conditionals: the estimate is pinned at one half
    let body = format!(
        r#"{{
  "schema_version": 1,
  "scenario": {{
      "space": "euclidean1d",
      "class0": {{"gaussian_mixture": {{"components": [{{"weight": 1.0, "mean": 0.0, "sd": 1.0}}]}}}},
      "class1": {{"gaussian_mixture": {{"components": [{{"weight": 1.0, "mean": 0.0, "sd": 1.0}}]}}}},
      "trajectory": {{"constant": {{"pi": 0.5}}}}
  }},
  "estimator": {{"delta": 0.1, "beta_bar": 1}},
  "sweep": {{"n": [50], "t": [8], "seeds": [3]}},
  "outputs": "{}"
}}"#,
        out_dir.display()
    );
    let config = write_config(tmp.path(), &body);
    run_ok(&[
        "estimate-eta",
        "--config",
        config.to_str().unwrap(),
        "--grid",
        "-2.0:2.0:9",
    ]);
    let text = std::fs::read_to_string(out_dir.join("eta_n50_T8_seed3.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "x,eta_true,eta_hat,chosen_radius");
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 9);
    for r in &rows {
        assert_eq!(r[1], 0.5);
        assert!((r[2] - 0.5).abs() < 1e-12, "eta_hat {}", r[2]);
    }

    // a single-point grid produces a single row
    run_ok(&[
        "estimate-eta",
        "--config",
        config.to_str().unwrap(),
        "--grid",
        "0.0:1.0:1",
        "--out",
        out_dir.join("single").to_str().unwrap(),
    ]);
    let text =
        std::fs::read_to_string(out_dir.join("single").join("eta_n50_T8_seed3.csv")).unwrap();
    assert_eq!(text.lines().count(), 2);

    // malformed grid is a usage error
    let out = bin()
        .args([
            "estimate-eta",
            "--config",
            config.to_str().unwrap(),
            "--grid",
            "1:2",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_produces_one_aggregate_per_point() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let body = format!(
        r#"{{
  "schema_version": 1,
  "scenario": {{"preset": "stationary"}},
  "estimator": {{"delta": 0.1, "beta_bar": 1}},
  "sweep": {{"n": [100, 200, 400], "t": [61], "seeds": [1, 2]}},
  "outputs": "{}"
}}"#,
        out_dir.display()
    );
    let config = write_config(tmp.path(), &body);
    run_ok(&["run", "--config", config.to_str().unwrap()]);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("summary.json")).unwrap())
            .unwrap();
    let aggregates = summary["aggregates"].as_array().unwrap();
    assert_eq!(aggregates.len(), 3); // one averaged-regret entry per n
    let ns: Vec<u64> = aggregates
        .iter()
        .map(|a| a["n"].as_u64().unwrap())
        .collect();
    assert_eq!(ns, vec![100, 200, 400]);
    for a in aggregates {
        assert!(a["median_averaged_regret"].as_f64().unwrap() >= 0.0);
        assert!(a["overlay"]["labelled_rate"].as_f64().unwrap() > 0.0);
        let note = a["overlay"]["note"].as_str().unwrap();
        assert!(note.contains("unspecified constants"));
    }
    assert_eq!(summary["cells"].as_array().unwrap().len(), 6);
}

#[test]
fn selftest_passes_and_is_stable() {
    let first = run_ok(&["selftest"]);
    let second = run_ok(&["selftest"]);
    let text = String::from_utf8_lossy(&first.stdout);
    assert!(text.contains("orthonormality"));
    assert!(text.contains("all 13 checks passed"));
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn jobs_env_var_is_the_default_pool_size() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let config = write_config(tmp.path(), &small_config(&out_dir));
    let out = bin()
        .args(["run", "--config", config.to_str().unwrap(), "--seeds", "1"])
        .env("DRIFTSHIFT_JOBS", "2")
        .output()
        .unwrap();
    assert!(out.status.success());
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["jobs"], 2);
    // an explicit flag wins over the environment
    let out = bin()
        .args([
            "run",
            "--config",
            config.to_str().unwrap(),
            "--seeds",
            "1",
            "--jobs",
            "3",
        ])
        .env("DRIFTSHIFT_JOBS", "2")
        .output()
        .unwrap();
    assert!(out.status.success());
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["jobs"], 3);
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), &small_config(Path::new("ignored")));
    let out_a = tmp.path().join("a");
    let out_b = tmp.path().join("b");
    for out in [&out_a, &out_b] {
        run_ok(&[
            "run",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
    }
    for name in [
        "regret_n200_T101_seed1.csv",
        "regret_n200_T101_seed2.csv",
        "regret_n200_T101_seed3.csv",
        "summary.json",
    ] {
        let a = std::fs::read(out_a.join(name)).unwrap();
        let b = std::fs::read(out_b.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between reruns");
    }
}
