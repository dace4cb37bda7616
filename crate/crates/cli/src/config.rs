//! Experiment configuration: defaults, `key = value` files and flag overrides.
//! Every file key is the long flag name without dashes.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use serde::Serialize;
use spectral_ensemble::synthetic::{CartelConfig, SimulationConfig, Targeting, DEFAULT_POOL};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "SML_OUT_DIR";
const FALLBACK_OUT_DIR: &str = "sml-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Rank,
    Predict,
    Simulate,
    Bench,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub input: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub out_dir: Option<PathBuf>,
    pub method: String,
    pub meta: Vec<String>,
    #[serde(rename = "M")]
    pub classifiers: usize,
    #[serde(rename = "S")]
    pub instances: usize,
    pub b: f64,
    pub pi_min: f64,
    pub pi_max: f64,
    pub cartel_r: f64,
    pub pi_c: f64,
    pub xi: f64,
    pub pool: Option<usize>,
    pub runs: Option<usize>,
    pub seed: u64,
    pub factor: f64,
    pub theta: Option<f64>,
    pub clamp: f64,
    pub max_iter: usize,
    pub preset: Option<String>,
    /// Keys set by a config file or flag, as opposed to defaults.
    #[serde(skip)]
    pub explicit: BTreeSet<String>,
}

impl ExperimentConfig {
    pub fn new(mode: Mode) -> Self {
        Self {
            mode,
            input: None,
            labels: None,
            out: None,
            out_dir: None,
            method: "linear".into(),
            meta: Vec::new(),
            classifiers: 100,
            instances: 600,
            b: 0.0,
            pi_min: 0.3,
            pi_max: 0.8,
            cartel_r: 0.0,
            pi_c: 0.5,
            xi: 0.7,
            pool: Some(DEFAULT_POOL),
            runs: None,
            seed: 0,
            factor: 2.0,
            theta: None,
            clamp: 1e-3,
            max_iter: 100,
            preset: None,
            explicit: BTreeSet::new(),
        }
    }

    /// Applies one setting; `key` is a flag name with or without dashes.
    pub fn set(&mut self, key: &str, value: &str) -> anyhow::Result<()> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> anyhow::Result<T>
        where
            T::Err: std::fmt::Display,
        {
            value.parse::<T>().map_err(|e| anyhow!("{key}: cannot parse {value:?}: {e}"))
        }
        let value = value.trim();
        let key = key.trim().replace('_', "-");
        match key.as_str() {
            "input" => self.input = Some(value.into()),
            "labels" => self.labels = Some(value.into()),
            "out" => self.out = Some(value.into()),
            "out-dir" => self.out_dir = Some(value.into()),
            "method" => self.method = value.to_string(),
            "meta" => {
                self.meta = value
                    .split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect()
            }
            "M" => self.classifiers = num(&key, value)?,
            "S" => self.instances = num(&key, value)?,
            "b" => self.b = num(&key, value)?,
            "pi-min" => self.pi_min = num(&key, value)?,
            "pi-max" => self.pi_max = num(&key, value)?,
            "cartel-r" => self.cartel_r = num(&key, value)?,
            "pi-c" => self.pi_c = num(&key, value)?,
            "xi" => self.xi = num(&key, value)?,
            "pool" => {
                self.pool = match value {
                    "none" | "0" => None,
                    v => Some(num(&key, v)?),
                }
            }
            "runs" => self.runs = Some(num(&key, value)?),
            "seed" => self.seed = num(&key, value)?,
            "factor" => self.factor = num(&key, value)?,
            "theta" => self.theta = Some(num(&key, value)?),
            "clamp" => self.clamp = num(&key, value)?,
            "max-iter" => self.max_iter = num(&key, value)?,
            "preset" => self.preset = Some(value.to_string()),
            other => bail!("unknown setting {other:?}"),
        }
        self.explicit.insert(key);
        Ok(())
    }

    /// Reads `key = value` lines; blank lines and `#` comments are skipped.
    pub fn apply_file(&mut self, path: &Path) -> anyhow::Result<()> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        for (k, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("{}:{}: expected key = value", path.display(), k + 1))?;
            self.set(key, value)
                .with_context(|| format!("{}:{}", path.display(), k + 1))?;
        }
        Ok(())
    }

    pub fn is_explicit(&self, key: &str) -> bool {
        self.explicit.contains(key)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.runs == Some(0) {
            bail!("runs must be at least 1");
        }
        if !(0.0..1.0).contains(&self.cartel_r) {
            bail!("cartel-r must lie in [0, 1), got {}", self.cartel_r);
        }
        for (name, v) in [("pi-min", self.pi_min), ("pi-max", self.pi_max), ("pi-c", self.pi_c), ("xi", self.xi)] {
            if !(0.0..=1.0).contains(&v) {
                bail!("{name} must lie in [0, 1], got {v}");
            }
        }
        if self.pi_min > self.pi_max {
            bail!("pi-min {} exceeds pi-max {}", self.pi_min, self.pi_max);
        }
        if !(self.b > -1.0 && self.b < 1.0) {
            bail!("b must lie in (-1, 1), got {}", self.b);
        }
        Ok(())
    }

    /// Output directory from the flag, then the environment, then a fixed default.
    pub fn resolved_out_dir(&self) -> PathBuf {
        self.out_dir
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(FALLBACK_OUT_DIR))
    }

    pub fn simulation(&self) -> SimulationConfig {
        SimulationConfig {
            classifiers: self.classifiers,
            instances: self.instances,
            class_imbalance: self.b,
            pi_min: self.pi_min,
            pi_max: self.pi_max,
            cartel: (self.cartel_r > 0.0).then_some(CartelConfig {
                fraction: self.cartel_r,
                pi_c: self.pi_c,
                xi: self.xi,
            }),
            pool: self.pool,
            targeting: Targeting::Nearest,
        }
    }
}
