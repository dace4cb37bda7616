//! Simulation presets producing plot-ready data. Each writes a long-form `results.csv`
//! (run, method, metric, value) and a `summary.json` report.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::anyhow;
use rayon::prelude::*;
use serde_json::{json, Value};
use spectral_ensemble::evaluation::{balanced_accuracy, monte_carlo_summary, ranking_quality};
use spectral_ensemble::meta::{default_meta_learners, MetaContext};
use spectral_ensemble::rng::child_seed;
use spectral_ensemble::spectral::{default_recoveries, rank_classifiers};
use spectral_ensemble::synthetic::{rank_two_spectrum, simulate, Simulation};
use spectral_ensemble::{CartelBlock, ClassifierPerformance, EnsembleSpec, Registry};

use crate::commands::{em_options, recovery_options, Report, DEFAULT_META};
use crate::config::ExperimentConfig;
use crate::io::write_text;

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub run: usize,
    pub method: String,
    pub metric: String,
    pub value: f64,
}

impl Row {
    fn new(run: usize, method: &str, metric: &str, value: f64) -> Self {
        Self {
            run,
            method: method.into(),
            metric: metric.into(),
            value,
        }
    }
}

pub trait BenchPreset: Send + Sync {
    fn name(&self) -> &'static str;
    fn default_runs(&self) -> usize;
    /// Fills in preset defaults for settings the user left alone.
    fn configure(&self, _cfg: &mut ExperimentConfig) {}
    fn run(&self, cfg: &ExperimentConfig, dir: &Path) -> anyhow::Result<Value>;
}

pub fn default_presets() -> Registry<dyn BenchPreset> {
    let mut reg: Registry<dyn BenchPreset> = Registry::new("bench preset");
    let all: [Box<dyn BenchPreset>; 5] = [
        Box::new(Fig2 { cartel: false }),
        Box::new(Fig2 { cartel: true }),
        Box::new(FigS2),
        Box::new(FigS6),
        Box::new(FigS1),
    ];
    for preset in all {
        reg.register(preset.name(), preset);
    }
    reg
}

fn set_default(cfg: &mut ExperimentConfig, key: &str, value: &str) {
    if !cfg.is_explicit(key) {
        cfg.set(key, value).expect("preset defaults parse");
        cfg.explicit.remove(key);
    }
}

struct Batch {
    rows: Vec<Row>,
    failures: Vec<(usize, String)>,
}

/// Runs `job` for every run index in parallel; results keep run order.
fn run_batch<F>(runs: std::ops::Range<usize>, seed: u64, job: F) -> Batch
where
    F: Fn(usize, u64) -> anyhow::Result<Vec<Row>> + Sync,
{
    let outcomes: Vec<(usize, anyhow::Result<Vec<Row>>)> = runs
        .into_par_iter()
        .map(|run| (run, job(run, child_seed(seed, run as u64))))
        .collect();
    let mut batch = Batch {
        rows: Vec::new(),
        failures: Vec::new(),
    };
    for (run, outcome) in outcomes {
        match outcome {
            Ok(rows) => batch.rows.extend(rows),
            Err(e) => batch.failures.push((run, format!("{e:#}"))),
        }
    }
    batch
}

fn long_form_csv(rows: &[Row]) -> String {
    let mut out = String::from("run,method,metric,value\n");
    for r in rows {
        writeln!(out, "{},{},{},{}", r.run, r.method, r.metric, r.value).expect("string write");
    }
    out
}

/// Distribution summary per (method, metric), skipping setting rows.
fn summarize(rows: &[Row]) -> anyhow::Result<Vec<Value>> {
    let mut groups: BTreeMap<(&str, &str), Vec<f64>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.method != "setting") {
        groups.entry((&r.method, &r.metric)).or_default().push(r.value);
    }
    groups
        .into_iter()
        .map(|((method, metric), values)| {
            Ok(json!({
                "method": method,
                "metric": metric,
                "summary": monte_carlo_summary(&values)?,
            }))
        })
        .collect()
}

fn write_outputs(cfg: &ExperimentConfig, dir: &Path, preset: &str, runs: usize, batch: &Batch, extra: Value) -> anyhow::Result<Value> {
    write_text(&dir.join("results.csv"), &long_form_csv(&batch.rows))?;
    let failures: Vec<Value> = batch
        .failures
        .iter()
        .map(|(run, error)| json!({ "run": run, "error": error }))
        .collect();
    let results = json!({
        "preset": preset,
        "runs": runs,
        "failed_runs": batch.failures.len(),
        "failures": failures,
        "summary": summarize(&batch.rows)?,
        "details": extra,
        "files": ["results.csv", "summary.json"],
    });
    let text = Report::new(cfg, results.clone(), Vec::new()).to_json()?;
    write_text(&dir.join("summary.json"), &text)?;
    Ok(results)
}

fn meta_list(cfg: &ExperimentConfig) -> Vec<String> {
    if cfg.meta.is_empty() {
        DEFAULT_META.iter().map(|s| s.to_string()).collect()
    } else {
        cfg.meta.clone()
    }
}

/// Balanced accuracy of the top-|v| classifier, ranking quality and every
/// requested meta-learner on one simulated scenario.
pub fn evaluate_scenario(cfg: &ExperimentConfig, sim: &Simulation, run: usize, seed: u64) -> anyhow::Result<Vec<Row>> {
    let ctx = MetaContext::new(&sim.predictions, seed)
        .with_recovery(cfg.method.clone(), recovery_options(cfg))
        .with_em(em_options(cfg))
        .with_truth(&sim.truth);
    let est = ctx.spectral()?;
    let mut rows = vec![Row::new(run, "best-v", "balanced_accuracy", sim.realized[est.strongest()].pi())];
    let q = ranking_quality(&est.v_hat, &est.ranking, &sim.realized_pis(), &[1, 5])?;
    rows.push(Row::new(run, "ranking", "kendall_tau", q.kendall_tau));
    rows.push(Row::new(run, "ranking", "rank_of_best", q.rank_of_best as f64));
    for (k, hit) in &q.top_k_hit {
        rows.push(Row::new(run, "ranking", &format!("top{k}"), f64::from(u8::from(*hit))));
    }
    let learners = default_meta_learners();
    for name in meta_list(cfg) {
        let outcome = learners.get(&name)?.predict(&ctx)?;
        rows.push(Row::new(
            run,
            &name,
            "balanced_accuracy",
            balanced_accuracy(&outcome.prediction.labels, &sim.truth)?,
        ));
        if let Some(em) = outcome.em {
            rows.push(Row::new(run, &name, "log_likelihood", em.log_likelihood));
            rows.push(Row::new(run, &name, "iterations", em.iteration as f64));
        }
    }
    Ok(rows)
}

/// Comparison of meta-learners, without (`fig2a`) or with
/// (`fig2b`) a cartel holding a third of the ensemble.
pub struct Fig2 {
    pub cartel: bool,
}

impl BenchPreset for Fig2 {
    fn name(&self) -> &'static str {
        if self.cartel {
            "fig2b"
        } else {
            "fig2a"
        }
    }

    fn default_runs(&self) -> usize {
        300
    }

    fn configure(&self, cfg: &mut ExperimentConfig) {
        if self.cartel {
            set_default(cfg, "cartel-r", &(1.0f64 / 3.0).to_string());
            set_default(cfg, "pi-c", "0.5");
            set_default(cfg, "xi", "0.7");
        }
    }

    fn run(&self, cfg: &ExperimentConfig, dir: &Path) -> anyhow::Result<Value> {
        let runs = cfg.runs.unwrap_or(self.default_runs());
        let sim_cfg = cfg.simulation();
        let batch = run_batch(0..runs, cfg.seed, |run, seed| {
            let sim = simulate(&sim_cfg, seed)?;
            evaluate_scenario(cfg, &sim, run, seed)
        });
        write_outputs(cfg, dir, self.name(), runs, &batch, json!({ "simulation": sim_cfg }))
    }
}

/// Rank of the truly best classifier under each diagonal recovery method.
pub struct FigS2;

const FIG_S2_METHODS: [&str; 3] = ["linear", "weighted", "eigen"];

impl BenchPreset for FigS2 {
    fn name(&self) -> &'static str {
        "figS2"
    }

    fn default_runs(&self) -> usize {
        300
    }

    fn run(&self, cfg: &ExperimentConfig, dir: &Path) -> anyhow::Result<Value> {
        let runs = cfg.runs.unwrap_or(self.default_runs());
        let methods: Vec<String> = if cfg.is_explicit("method") {
            vec![cfg.method.clone()]
        } else {
            FIG_S2_METHODS.iter().map(|s| s.to_string()).collect()
        };
        let sim_cfg = cfg.simulation();
        let registry = default_recoveries();
        let options = recovery_options(cfg);
        let batch = run_batch(0..runs, cfg.seed, |run, seed| {
            let sim = simulate(&sim_cfg, seed)?;
            let truth = sim.realized_pis();
            let mut rows = Vec::new();
            for m in &methods {
                let est = rank_classifiers(&sim.predictions, registry.get(m)?, &options)?;
                let q = ranking_quality(&est.v_hat, &est.ranking, &truth, &[1, 5])?;
                rows.push(Row::new(run, m, "rank_of_best", q.rank_of_best as f64));
                rows.push(Row::new(run, m, "kendall_tau", q.kendall_tau));
                for (k, hit) in &q.top_k_hit {
                    rows.push(Row::new(run, m, &format!("top{k}"), f64::from(u8::from(*hit))));
                }
            }
            Ok(rows)
        });
        let mut histograms = serde_json::Map::new();
        for m in &methods {
            let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
            for r in batch.rows.iter().filter(|r| &r.method == m && r.metric == "rank_of_best") {
                *counts.entry(r.value as usize).or_default() += 1;
            }
            let counts: Vec<Value> = counts.into_iter().map(|(rank, n)| json!([rank, n])).collect();
            histograms.insert(m.clone(), json!(counts));
        }
        write_outputs(
            cfg,
            dir,
            self.name(),
            runs,
            &batch,
            json!({ "simulation": sim_cfg, "rank_of_best_histogram": histograms }),
        )
    }
}

/// Meta-learner accuracy against the cartel fraction.
pub struct FigS6;

const FIG_S6_FRACTIONS: [f64; 10] = [0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45];

impl BenchPreset for FigS6 {
    fn name(&self) -> &'static str {
        "figS6"
    }

    fn default_runs(&self) -> usize {
        100
    }

    fn configure(&self, cfg: &mut ExperimentConfig) {
        set_default(cfg, "pi-min", "0.55");
        set_default(cfg, "pi-c", "0.5");
        set_default(cfg, "xi", "0.7");
    }

    fn run(&self, cfg: &ExperimentConfig, dir: &Path) -> anyhow::Result<Value> {
        let runs = cfg.runs.unwrap_or(self.default_runs());
        let total = runs * FIG_S6_FRACTIONS.len();
        let batch = run_batch(0..total, cfg.seed, |run, seed| {
            let r = FIG_S6_FRACTIONS[run / runs];
            let mut local = cfg.clone();
            local.cartel_r = r;
            let sim = simulate(&local.simulation(), seed)?;
            let mut rows = vec![Row::new(run, "setting", "cartel_fraction", r)];
            rows.extend(evaluate_scenario(&local, &sim, run, seed)?);
            Ok(rows)
        });
        let mut curves = Vec::new();
        for (k, &r) in FIG_S6_FRACTIONS.iter().enumerate() {
            let range = k * runs..(k + 1) * runs;
            let subset: Vec<Row> = batch.rows.iter().filter(|row| range.contains(&row.run)).cloned().collect();
            let methods: Vec<Value> = summarize(&subset)?
                .into_iter()
                .filter(|v| v["metric"] == "balanced_accuracy")
                .map(|v| {
                    json!({
                        "method": v["method"],
                        "mean": v["summary"]["mean"],
                        "stderr": v["summary"]["stderr"],
                    })
                })
                .collect();
            curves.push(json!({ "cartel_fraction": r, "methods": methods }));
        }
        write_outputs(cfg, dir, self.name(), total, &batch, json!({ "runs_per_fraction": runs, "curves": curves }))
    }
}

/// Heatmap of the angle between the truth direction and the leading
/// eigenvector over the cartel parameters (k1, k2).
pub struct FigS1;

/// Spec with `lambda_P = 1` (one perfect honest classifier, b = 0) whose
/// cartel has `2 pi_c - 1 = k1` and mass `k2`.
pub fn spec_for(k1: f64, k2: f64) -> anyhow::Result<EnsembleSpec> {
    let members = (k2.ceil() as usize).max(1);
    let tau = (k2 / members as f64).sqrt();
    let cartel = CartelBlock::symmetric((1.0 + k1) / 2.0, &vec![(1.0 + tau) / 2.0; members])?;
    Ok(EnsembleSpec::new(0.0, vec![ClassifierPerformance::symmetric(1.0)?], Some(cartel))?)
}

impl BenchPreset for FigS1 {
    fn name(&self) -> &'static str {
        "figS1"
    }

    fn default_runs(&self) -> usize {
        1
    }

    fn run(&self, cfg: &ExperimentConfig, dir: &Path) -> anyhow::Result<Value> {
        let k1_grid: Vec<f64> = (0..=40).map(|i| -1.0 + i as f64 * 0.05).collect();
        let k2_grid: Vec<f64> = (1..=40).map(|i| i as f64 * 0.1).collect();
        let mut csv = String::from("k1,k2,alpha_deg,abs_alpha_deg,beta_deg,lambda1,lambda2\n");
        let (mut cells, mut small, mut degenerate) = (0usize, 0usize, 0usize);
        for &k2 in &k2_grid {
            for &k1 in &k1_grid {
                let spectrum = rank_two_spectrum(&spec_for(k1, k2)?).map_err(|e| anyhow!("k1={k1}, k2={k2}: {e}"))?;
                let alpha = spectrum.alpha.to_degrees();
                cells += 1;
                small += usize::from(alpha.abs() <= 6.0);
                degenerate += usize::from(!spectrum.warnings.is_empty());
                writeln!(
                    csv,
                    "{k1},{k2},{alpha},{},{},{},{}",
                    alpha.abs(),
                    spectrum.beta.to_degrees(),
                    spectrum.lambda1,
                    spectrum.lambda2
                )
                .expect("string write");
            }
        }
        write_text(&dir.join("heatmap.csv"), &csv)?;
        let results = json!({
            "preset": self.name(),
            "cells": cells,
            "abs_alpha_at_most_6_deg": small,
            "degenerate_cells": degenerate,
            "files": ["heatmap.csv", "summary.json"],
        });
        let text = Report::new(cfg, results.clone(), Vec::new()).to_json()?;
        write_text(&dir.join("summary.json"), &text)?;
        Ok(results)
    }
}

pub fn run_bench(cfg: &mut ExperimentConfig) -> anyhow::Result<Value> {
    let name = cfg.preset.clone().ok_or_else(|| anyhow!("--preset is required"))?;
    let registry = default_presets();
    let preset = registry.get(&name)?;
    preset.configure(cfg);
    cfg.validate()?;
    let dir = cfg.resolved_out_dir();
    std::fs::create_dir_all(&dir)?;
    preset.run(cfg, &dir)
}
