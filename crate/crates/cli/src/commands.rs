//! `rank`, `predict` and `simulate`.

use std::path::PathBuf;

use anyhow::{bail, Context};
use serde::Serialize;
use serde_json::{json, Value};
use spectral_ensemble::evaluation::balanced_accuracy;
use spectral_ensemble::meta::{default_meta_learners, EmOptions, MetaContext};
use spectral_ensemble::spectral::{default_recoveries, rank_classifiers, RecoveryOptions};
use spectral_ensemble::synthetic::simulate;
use spectral_ensemble::{confusion_stats, LabelVector, PredictionMatrix, Warning};

use crate::config::ExperimentConfig;
use crate::io::{load_labels, load_predictions, write_label_columns, write_labels, write_predictions, write_text};

/// Stable top-level layout of every JSON report.
#[derive(Serialize)]
pub struct Report<'a> {
    pub config: &'a ExperimentConfig,
    pub seed: u64,
    pub results: Value,
    pub warnings: Vec<Value>,
}

impl<'a> Report<'a> {
    pub fn new(config: &'a ExperimentConfig, results: Value, warnings: Vec<Value>) -> Self {
        Self {
            config,
            seed: config.seed,
            results,
            warnings,
        }
    }

    pub fn to_json(&self) -> anyhow::Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

pub fn warning_values(warnings: &[Warning]) -> Vec<Value> {
    warnings
        .iter()
        .map(|w| serde_json::to_value(w).expect("warnings serialize"))
        .collect()
}

pub fn recovery_options(cfg: &ExperimentConfig) -> RecoveryOptions {
    RecoveryOptions {
        factor: cfg.factor,
        theta: cfg.theta,
        ..RecoveryOptions::default()
    }
}

pub fn em_options(cfg: &ExperimentConfig) -> EmOptions {
    EmOptions {
        clamp: cfg.clamp,
        max_iter: cfg.max_iter,
    }
}

fn input_matrix(cfg: &ExperimentConfig) -> anyhow::Result<PredictionMatrix> {
    let Some(path) = &cfg.input else {
        bail!("--input is required");
    };
    load_predictions(path).with_context(|| format!("loading {}", path.display()))
}

fn classifier_name(matrix: &PredictionMatrix, i: usize) -> String {
    matrix.names().map_or_else(|| format!("c{i}"), |n| n[i].clone())
}

/// Writes the report to `--out` if given, otherwise returns it for stdout.
fn emit(cfg: &ExperimentConfig, report: &Report<'_>) -> anyhow::Result<Option<String>> {
    let text = report.to_json()?;
    match &cfg.out {
        Some(path) => {
            write_text(path, &text)?;
            Ok(None)
        }
        None => Ok(Some(text)),
    }
}

pub fn run_rank(cfg: &ExperimentConfig) -> anyhow::Result<Option<String>> {
    let matrix = input_matrix(cfg)?;
    let registry = default_recoveries();
    let recovery = registry.get(&cfg.method)?;
    let estimate = rank_classifiers(&matrix, recovery, &recovery_options(cfg))
        .with_context(|| format!("ranking with method {}", cfg.method))?;
    let ranking: Vec<Value> = estimate
        .ranking
        .iter()
        .enumerate()
        .map(|(pos, &i)| {
            json!({
                "rank": pos + 1,
                "index": i,
                "name": classifier_name(&matrix, i),
                "v": estimate.v_hat[i],
            })
        })
        .collect();
    let results = json!({
        "method": cfg.method,
        "lambda_hat": estimate.lambda_hat,
        "v_hat": estimate.v_hat,
        "ranking": ranking,
        "masked_pairs": estimate.masked_pairs,
        "low_confidence": estimate.low_confidence,
        "excluded": estimate.diagonal_fit.as_ref().map(|f| f.excluded.clone()).unwrap_or_default(),
        "diagonal_residual": estimate.diagonal_fit.as_ref().map(|f| f.residual),
    });
    emit(cfg, &Report::new(cfg, results, warning_values(&estimate.warnings)))
}

pub const DEFAULT_META: [&str; 4] = ["vote", "sml", "imle-sml", "imle-vote"];

pub fn run_predict(cfg: &ExperimentConfig) -> anyhow::Result<Option<String>> {
    let matrix = input_matrix(cfg)?;
    let truth = match &cfg.labels {
        Some(path) => Some(load_labels(path).with_context(|| format!("loading {}", path.display()))?),
        None => None,
    };
    if let Some(t) = &truth {
        if t.len() != matrix.instances() {
            bail!("labels file has {} entries for {} instances", t.len(), matrix.instances());
        }
    }
    let meta: Vec<String> = if cfg.meta.is_empty() {
        DEFAULT_META.iter().map(|s| s.to_string()).collect()
    } else {
        cfg.meta.clone()
    };
    let mut ctx = MetaContext::new(&matrix, cfg.seed)
        .with_recovery(cfg.method.clone(), recovery_options(cfg))
        .with_em(em_options(cfg));
    if let Some(t) = &truth {
        ctx = ctx.with_truth(t);
    }
    let registry = default_meta_learners();
    let mut results = Vec::new();
    let mut columns: Vec<(String, LabelVector)> = Vec::new();
    for name in &meta {
        let learner = registry.get(name)?;
        let outcome = learner.predict(&ctx).with_context(|| format!("meta-learner {name}"))?;
        let mut entry = json!({
            "method": name,
            "tie_count": outcome.prediction.tie_count,
            "positives": outcome.prediction.labels.positives(),
        });
        if let Some(t) = &truth {
            entry["balanced_accuracy"] = json!(balanced_accuracy(&outcome.prediction.labels, t)?);
        }
        if let Some(em) = &outcome.em {
            entry["em"] = json!({
                "iterations": em.iteration,
                "converged": em.converged,
                "log_likelihood": em.log_likelihood,
                "warnings": warning_values(&em.warnings),
            });
        }
        results.push(entry);
        columns.push((name.clone(), outcome.prediction.labels));
    }
    let labels_path = cfg.resolved_out_dir().join("labels.csv");
    let refs: Vec<(String, &LabelVector)> = columns.iter().map(|(n, l)| (n.clone(), l)).collect();
    write_label_columns(&labels_path, &refs)?;
    let warnings = match ctx.spectral() {
        Ok(est) if meta.iter().any(|m| m.contains("sml")) => warning_values(&est.warnings),
        _ => Vec::new(),
    };
    let results = json!({ "methods": results, "labels_file": "labels.csv" });
    emit(cfg, &Report::new(cfg, results, warnings))
}

pub fn run_simulate(cfg: &ExperimentConfig) -> anyhow::Result<Option<String>> {
    let sim_cfg = cfg.simulation();
    let sim = simulate(&sim_cfg, cfg.seed)?;
    let dir: PathBuf = cfg.resolved_out_dir();
    write_predictions(&dir.join("predictions.csv"), &sim.predictions)?;
    write_labels(&dir.join("truth.csv"), &sim.truth)?;
    let mut files = vec!["predictions.csv", "truth.csv", "spec.json"];
    let members: std::collections::HashSet<usize> = sim.cartel_members.iter().copied().collect();
    let classifiers: Vec<Value> = (0..sim.predictions.classifiers())
        .map(|i| {
            let p = &sim.realized[i];
            let mut entry = json!({
                "index": i,
                "name": format!("c{i}"),
                "cartel": members.contains(&i),
                "target_pi": sim.targets[i],
                "psi": p.psi,
                "eta": p.eta,
                "pi": p.pi(),
            });
            if let (true, Some(target)) = (members.contains(&i), &sim.cartel_target) {
                if let Ok(rel) = confusion_stats(&sim.predictions.column(i), target) {
                    entry["xi_realized"] = json!(rel.pi());
                }
            }
            entry
        })
        .collect();
    let mut cartel = Value::Null;
    if let (Some(target), Some(perf)) = (&sim.cartel_target, &sim.cartel_target_performance) {
        write_labels(&dir.join("cartel_target.csv"), target)?;
        files.push("cartel_target.csv");
        cartel = json!({
            "members": sim.cartel_members,
            "target_psi": perf.psi,
            "target_eta": perf.eta,
            "target_pi": perf.pi(),
        });
    }
    let results = json!({
        "simulation": sim_cfg,
        "best_classifier": sim.best_classifier(),
        "classifiers": classifiers,
        "cartel": cartel,
        "files": files,
    });
    let text = Report::new(cfg, results, Vec::new()).to_json()?;
    write_text(&dir.join("spec.json"), &text)?;
    if let Some(out) = &cfg.out {
        write_text(out, &text)?;
    }
    Ok(None)
}
