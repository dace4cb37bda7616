//! Command-line front end: file I/O, experiment orchestration and
//! plot-ready output for the spectral ensemble library.

pub mod bench;
pub mod commands;
pub mod config;
pub mod io;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{ExperimentConfig, Mode};

#[derive(Debug, Parser)]
#[command(name = "sml", version, about = "Rank and combine binary classifiers without labels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rank classifiers by the leading eigenvector of their covariance.
    Rank(Settings),
    /// Label instances with one or more meta-learners.
    Predict(Settings),
    /// Generate a synthetic ensemble with known truth.
    Simulate(Settings),
    /// Reproduce a simulation figure as plot-ready data.
    Bench(Settings),
}

/// Every setting can also come from a `key = value` config file.
#[derive(Debug, Args, Default)]
pub struct Settings {
    /// Config file of `key = value` lines; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Prediction CSV (rows = instances, columns = classifiers).
    #[arg(long)]
    pub input: Option<String>,
    /// Ground-truth labels, one +/-1 per line.
    #[arg(long)]
    pub labels: Option<String>,
    /// JSON report path; stdout if omitted.
    #[arg(long)]
    pub out: Option<String>,
    /// Output directory; defaults to $SML_OUT_DIR, then ./sml-out.
    #[arg(long = "out-dir")]
    pub out_dir: Option<String>,
    /// Diagonal recovery: linear, weighted, trace or eigen.
    #[arg(long)]
    pub method: Option<String>,
    /// Comma-separated meta-learners: vote, sml, mle, imle-sml, imle-vote.
    #[arg(long)]
    pub meta: Option<String>,
    /// Number of classifiers.
    #[arg(long = "M")]
    pub classifiers: Option<String>,
    /// Number of test instances.
    #[arg(long = "S")]
    pub instances: Option<String>,
    /// Class imbalance Pr[+1] - Pr[-1].
    #[arg(long = "b", allow_hyphen_values = true)]
    pub b: Option<String>,
    #[arg(long = "pi-min")]
    pub pi_min: Option<String>,
    #[arg(long = "pi-max")]
    pub pi_max: Option<String>,
    /// Fraction of the ensemble in the cartel.
    #[arg(long = "cartel-r")]
    pub cartel_r: Option<String>,
    /// Balanced accuracy of the cartel target against the truth.
    #[arg(long = "pi-c")]
    pub pi_c: Option<String>,
    /// Balanced accuracy of cartel members against the target.
    #[arg(long)]
    pub xi: Option<String>,
    /// Pool size the classifiers are targeted on, or `none`.
    #[arg(long)]
    pub pool: Option<String>,
    #[arg(long)]
    pub runs: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// Significance threshold in standard errors.
    #[arg(long)]
    pub factor: Option<String>,
    /// Trace penalty for the relaxation method.
    #[arg(long)]
    pub theta: Option<String>,
    /// Clamp for sensitivities and specificities in maximum likelihood.
    #[arg(long)]
    pub clamp: Option<String>,
    /// Iteration cap for EM refinement.
    #[arg(long = "max-iter")]
    pub max_iter: Option<String>,
    /// Bench preset: fig2a, fig2b, figS2, figS6 or figS1.
    #[arg(long)]
    pub preset: Option<String>,
}

impl Settings {
    fn pairs(&self) -> [(&'static str, &Option<String>); 22] {
        [
            ("input", &self.input),
            ("labels", &self.labels),
            ("out", &self.out),
            ("out-dir", &self.out_dir),
            ("method", &self.method),
            ("meta", &self.meta),
            ("M", &self.classifiers),
            ("S", &self.instances),
            ("b", &self.b),
            ("pi-min", &self.pi_min),
            ("pi-max", &self.pi_max),
            ("cartel-r", &self.cartel_r),
            ("pi-c", &self.pi_c),
            ("xi", &self.xi),
            ("pool", &self.pool),
            ("runs", &self.runs),
            ("seed", &self.seed),
            ("factor", &self.factor),
            ("theta", &self.theta),
            ("clamp", &self.clamp),
            ("max-iter", &self.max_iter),
            ("preset", &self.preset),
        ]
    }

    /// Defaults, then the config file, then flags.
    pub fn resolve(&self, mode: Mode) -> anyhow::Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::new(mode);
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        for (key, value) in self.pairs() {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Runs one subcommand; returns text destined for stdout, if any.
pub fn run(cli: &Cli) -> anyhow::Result<Option<String>> {
    match &cli.command {
        Command::Rank(s) => commands::run_rank(&s.resolve(Mode::Rank)?),
        Command::Predict(s) => commands::run_predict(&s.resolve(Mode::Predict)?),
        Command::Simulate(s) => commands::run_simulate(&s.resolve(Mode::Simulate)?),
        Command::Bench(s) => {
            let mut cfg = s.resolve(Mode::Bench)?;
            let results = bench::run_bench(&mut cfg)?;
            Ok(Some(serde_json::to_string_pretty(&results)? + "\n"))
        }
    }
}
