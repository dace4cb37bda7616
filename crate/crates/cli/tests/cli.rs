use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use spectral_ensemble::synthetic::simulate;
use spectral_ensemble_cli::config::{ExperimentConfig, Mode, OUT_DIR_ENV};
use spectral_ensemble_cli::io::{load_labels, load_predictions, LoadError};

fn sml(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sml"))
        .args(args)
        .env_remove(OUT_DIR_ENV)
        .output()
        .expect("spawn sml")
}

fn ok_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn simulate_round_trips_through_load() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = sml(&["simulate", "--M", "12", "--S", "80", "--seed", "9", "--pool", "none", "--out-dir", d]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let mut cfg = ExperimentConfig::new(Mode::Simulate);
    for (k, v) in [("M", "12"), ("S", "80"), ("pool", "none")] {
        cfg.set(k, v).unwrap();
    }
    let sim = simulate(&cfg.simulation(), 9).unwrap();
    let loaded = load_predictions(&dir.path().join("predictions.csv")).unwrap();
    assert_eq!(loaded.as_row_major(), sim.predictions.as_row_major());
    let truth = load_labels(&dir.path().join("truth.csv")).unwrap();
    assert_eq!(truth, sim.truth);

    let spec: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("spec.json")).unwrap()).unwrap();
    assert_eq!(spec["seed"], 9);
    assert_eq!(spec["config"]["M"], 12);
    assert_eq!(spec["results"]["classifiers"].as_array().unwrap().len(), 12);
}

#[test]
fn simulate_with_cartel_writes_target() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = sml(&["simulate", "--M", "30", "--S", "200", "--cartel-r", "0.2", "--pi-c", "0.5", "--xi", "0.7", "--out-dir", d]);
    assert!(out.status.success());
    assert!(dir.path().join("cartel_target.csv").exists());
    let spec: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("spec.json")).unwrap()).unwrap();
    assert_eq!(spec["results"]["cartel"]["members"].as_array().unwrap().len(), 6);
}

#[test]
fn load_errors_point_at_the_cell() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.csv", "a,b,c\n1,-1,1\n1,2,1\n");
    let err = load_predictions(Path::new(&bad)).unwrap_err();
    assert!(matches!(err, LoadError::MalformedLabel { row: 3, col: 2, .. }), "{err}");

    let out = sml(&["rank", "--input", &bad]);
    assert!(!out.status.success());
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("row 3, column 2"), "{msg}");

    let missing = sml(&["rank", "--input", "/nonexistent/p.csv"]);
    assert!(!missing.status.success());
}

#[test]
fn two_classifiers_need_direct_eigen() {
    let dir = tempfile::tempdir().unwrap();
    let body: String = (0..40).map(|k| if k % 3 == 0 { "1,-1\n" } else { "1,1\n" }).collect();
    let input = write(dir.path(), "two.csv", &body);
    let linear = sml(&["rank", "--input", &input, "--method", "linear"]);
    assert!(!linear.status.success());
    let msg = String::from_utf8_lossy(&linear.stderr);
    assert!(msg.contains("significant covariance") || msg.contains("rank deficient"), "{msg}");

    let eigen = ok_json(&sml(&["rank", "--input", &input, "--method", "eigen"]));
    assert_eq!(eigen["results"]["v_hat"].as_array().unwrap().len(), 2);
}

#[test]
fn duplicated_columns_get_equal_weight() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert!(sml(&["simulate", "--M", "20", "--S", "600", "--pi-min", "0.6", "--seed", "2", "--out-dir", d]).status.success());
    let text = std::fs::read_to_string(dir.path().join("predictions.csv")).unwrap();
    let doubled: String = text
        .lines()
        .enumerate()
        .map(|(k, line)| {
            let first = line.split(',').next().unwrap();
            let extra = if k == 0 { "copy".to_string() } else { first.to_string() };
            format!("{line},{extra}\n")
        })
        .collect();
    let input = write(dir.path(), "dup.csv", &doubled);
    for method in ["linear", "weighted", "eigen"] {
        let report = ok_json(&sml(&["rank", "--input", &input, "--method", method]));
        let v = report["results"]["v_hat"].as_array().unwrap();
        let (a, b) = (v[0].as_f64().unwrap(), v[20].as_f64().unwrap());
        assert!((a.abs() - b.abs()).abs() <= 1e-9, "{method}: {a} vs {b}");
        let names: Vec<&str> = report["results"]["ranking"]
            .as_array()
            .unwrap()
            .iter()
            .map(|r| r["name"].as_str().unwrap())
            .collect();
        assert!(names.contains(&"copy"));
    }
}

#[test]
fn unanimous_predictions_pass_through() {
    let dir = tempfile::tempdir().unwrap();
    let rows = ["1,1,1,1", "-1,-1,-1,-1", "1,1,1,1", "-1,-1,-1,-1", "1,1,1,1", "1,1,1,1"];
    let input = write(dir.path(), "u.csv", &(rows.join("\n") + "\n"));
    let labels = write(dir.path(), "y.csv", "1\n-1\n1\n-1\n1\n1\n");
    let d = dir.path().join("out");
    let report = ok_json(&sml(&[
        "predict",
        "--input",
        &input,
        "--labels",
        &labels,
        "--method",
        "eigen",
        "--meta",
        "vote,sml,imle-sml,imle-vote,mle",
        "--out-dir",
        d.to_str().unwrap(),
    ]));
    for m in report["results"]["methods"].as_array().unwrap() {
        assert_eq!(m["balanced_accuracy"], 1.0, "{}", m["method"]);
    }
    let csv = std::fs::read_to_string(d.join("labels.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "vote,sml,imle-sml,imle-vote,mle");
    let expected = ["1", "-1", "1", "-1", "1", "1"];
    for (line, want) in lines.zip(expected) {
        assert!(line.split(',').all(|c| c == want), "{line}");
    }
}

#[test]
fn predict_reports_accuracy_and_em() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert!(sml(&["simulate", "--seed", "4", "--out-dir", d]).status.success());
    let pred = dir.path().join("predictions.csv");
    let truth = dir.path().join("truth.csv");
    let report = ok_json(&sml(&[
        "predict",
        "--input",
        pred.to_str().unwrap(),
        "--labels",
        truth.to_str().unwrap(),
        "--out-dir",
        d,
    ]));
    let methods = report["results"]["methods"].as_array().unwrap();
    let acc = |name: &str| {
        methods.iter().find(|m| m["method"] == name).unwrap()["balanced_accuracy"].as_f64().unwrap()
    };
    assert!(acc("sml") > acc("vote"));
    for name in ["imle-sml", "imle-vote"] {
        let em = &methods.iter().find(|m| m["method"] == name).unwrap()["em"];
        assert!(em["log_likelihood"].as_f64().unwrap().is_finite());
        assert!(em["iterations"].as_u64().unwrap() >= 1);
    }
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("sim");
    let cfg = write(
        dir.path(),
        "run.cfg",
        &format!("# small run\nM = 7\nS = 40\nseed = 12\nout_dir = {}\n", d.display()),
    );
    let out = sml(&["simulate", "--config", &cfg, "--M", "9"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let spec: Value = serde_json::from_str(&std::fs::read_to_string(d.join("spec.json")).unwrap()).unwrap();
    assert_eq!(spec["config"]["M"], 9);
    assert_eq!(spec["config"]["S"], 40);
    assert_eq!(spec["seed"], 12);

    let bad = write(dir.path(), "bad.cfg", "M = 7\nwidth = 3\n");
    let out = sml(&["simulate", "--config", &bad]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("width"));
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_sml"))
        .args(["simulate", "--M", "5", "--S", "30"])
        .env(OUT_DIR_ENV, dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("predictions.csv").exists());
}

#[test]
fn invalid_settings_exit_nonzero() {
    for args in [
        vec!["simulate", "--cartel-r", "1.5"],
        vec!["simulate", "--pi-min", "0.9", "--pi-max", "0.2"],
        vec!["bench", "--preset", "fig9"],
        vec!["rank"],
        vec!["bench", "--runs", "0"],
    ] {
        let out = sml(&args);
        assert!(!out.status.success(), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    }
}

#[test]
fn bench_records_failures_without_aborting() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    // Two instances leave no room for both classes under this imbalance.
    let out = sml(&["bench", "--preset", "fig2a", "--runs", "2", "--S", "2", "--b", "0.9", "--pool", "none", "--out-dir", d]);
    let report = ok_json(&out);
    assert_eq!(report["failed_runs"], 2);
    assert!(dir.path().join("summary.json").exists());
}

#[test]
fn bench_presets_write_long_form_csv() {
    let dir = tempfile::tempdir().unwrap();
    for preset in ["fig2a", "fig2b", "figS2", "figS6"] {
        let d = dir.path().join(preset);
        let out = sml(&[
            "bench", "--preset", preset, "--runs", "2", "--M", "20", "--S", "100", "--seed", "1", "--out-dir",
            d.to_str().unwrap(),
        ]);
        let report = ok_json(&out);
        // Small ensembles may leave the diagonal system unidentifiable; such runs are recorded.
        let failed = report["failed_runs"].as_u64().unwrap() as usize;
        assert_eq!(failed, report["failures"].as_array().unwrap().len());
        assert!(failed < report["runs"].as_u64().unwrap() as usize, "{preset}: {}", report["failures"]);
        let csv = std::fs::read_to_string(d.join("results.csv")).unwrap();
        assert_eq!(csv.lines().next().unwrap(), "run,method,metric,value");
        assert!(csv.lines().count() > 2);
    }
}

#[test]
fn heatmap_marks_the_small_angle_region() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let report = ok_json(&sml(&["bench", "--preset", "figS1", "--out-dir", d]));
    assert_eq!(report["cells"], 41 * 40);
    assert!(report["abs_alpha_at_most_6_deg"].as_u64().unwrap() > 0);
    let heat = std::fs::read_to_string(dir.path().join("heatmap.csv")).unwrap();
    let rows: Vec<Vec<f64>> = heat
        .lines()
        .skip(1)
        .map(|l| l.split(',').take(3).map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 41 * 40);
    // k1 = 0 is an unrelated target: the leading direction ignores the cartel.
    let at_zero: Vec<&Vec<f64>> = rows.iter().filter(|r| r[0].abs() < 1e-9 && r[1] < 0.95).collect();
    assert!(!at_zero.is_empty());
    assert!(at_zero.iter().all(|r| r[2].abs() <= 6.0), "{at_zero:?}");
}
