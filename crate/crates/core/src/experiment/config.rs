//! Experiment configuration files.
//!
//! ```toml
//! [experiment]
//! folds = 10                      # optional, default 10
//! master_seed = 42
//! output_dir = "results"          # relative to the config file
//! strategies = ["ori", "smote", "integrated"]
//! threads = 0                     # optional; 0 = all cores
//!
//! [[dataset]]
//! name = "D9"
//! csv = "data/d9.csv"             # relative to the config file
//! label_column = "isGoodWebsite"
//! positive = "0"
//! allow_missing = false           # optional; impute fold-wise with train medians
//!
//! [[dataset]]
//! name = "synthetic"
//! synthetic = { n_total = 2000, majority_fraction = 0.9, n_features = 20, separation = 2.0, seed = 7 }
//!
//! [[classifier]]
//! kind = "knn"                    # knn | gnb | tree | bagging | random_forest | adaboost
//! name = "knn10"                  # optional, defaults to kind
//! k = 10                          # remaining keys are hyperparameters
//!
//! [smote]                         # stand-alone SMOTE strategy
//! amount = "to-balance"           # percent (200), "to-balance" or "fraction:0.5"
//! k = 5
//!
//! [pso]                           # stand-alone PSO and the PSO stage of integrated
//! swarm_size = 40
//! max_iterations = 100
//! patience = 20
//! c1 = 2.0
//! c2 = 2.0
//! inertia = 1.0
//! v_max = 4.0
//! fitness_folds = 5
//!
//! [integrated]
//! smote_amount = 100
//! smote_k = 5
//! ```
//!
//! Unknown sections and keys are rejected.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::{Strategy, StrategyParams};
use crate::classifiers::{ClassifierKind, ClassifierSpec};
use crate::dataset::{generate_synthetic, load_csv_with, Dataset, LoadOptions, SyntheticSpec};
use crate::error::{Error, Result};
use crate::resampling::SmoteAmount;

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSource {
    Csv {
        path: PathBuf,
        label_column: String,
        positive: String,
        allow_missing: bool,
    },
    Synthetic(SyntheticSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetConfig {
    pub name: String,
    pub source: DatasetSource,
}

impl DatasetConfig {
    pub fn load(&self) -> Result<Dataset> {
        match &self.source {
            DatasetSource::Csv {
                path,
                label_column,
                positive,
                allow_missing,
            } => load_csv_with(
                path,
                label_column,
                positive,
                &LoadOptions {
                    allow_missing: *allow_missing,
                },
            ),
            DatasetSource::Synthetic(spec) => generate_synthetic(spec),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub datasets: Vec<DatasetConfig>,
    pub strategies: Vec<Strategy>,
    pub params: StrategyParams,
    pub classifiers: Vec<ClassifierSpec>,
    pub folds: usize,
    pub master_seed: u64,
    pub output_dir: PathBuf,
    /// Worker threads; 0 uses the global pool.
    pub threads: usize,
    /// Raw text the config was parsed from, hashed into the provenance record.
    pub source_text: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: RawExperiment,
    #[serde(default)]
    dataset: Vec<RawDataset>,
    #[serde(default)]
    classifier: Vec<toml::Table>,
    smote: Option<RawSmote>,
    pso: Option<RawPso>,
    integrated: Option<RawIntegrated>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    folds: Option<usize>,
    master_seed: u64,
    output_dir: PathBuf,
    strategies: Vec<String>,
    threads: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDataset {
    name: String,
    csv: Option<PathBuf>,
    label_column: Option<String>,
    positive: Option<String>,
    allow_missing: Option<bool>,
    synthetic: Option<RawSynthetic>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSynthetic {
    n_total: usize,
    majority_fraction: f64,
    n_features: usize,
    separation: f64,
    seed: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSmote {
    amount: Option<toml::Value>,
    k: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPso {
    swarm_size: Option<usize>,
    max_iterations: Option<usize>,
    patience: Option<usize>,
    c1: Option<f64>,
    c2: Option<f64>,
    inertia: Option<f64>,
    v_max: Option<f64>,
    fitness_folds: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIntegrated {
    smote_amount: Option<toml::Value>,
    smote_k: Option<usize>,
}

fn smote_amount(v: &toml::Value) -> Result<SmoteAmount> {
    match v {
        toml::Value::Integer(i) if *i >= 0 && *i <= u32::MAX as i64 => Ok(SmoteAmount::Percent(*i as u32)),
        toml::Value::String(s) => s.parse().map_err(|e: Error| Error::Config(e.to_string())),
        other => Err(Error::Config(format!(
            "SMOTE amount must be a percentage or string, got {other}"
        ))),
    }
}

fn classifier(table: &toml::Table, index: usize) -> Result<ClassifierSpec> {
    let at = |msg: String| Error::Config(format!("classifier #{}: {msg}", index + 1));
    let kind = match table.get("kind") {
        Some(toml::Value::String(s)) => s.parse::<ClassifierKind>().map_err(|e| at(e.to_string()))?,
        Some(_) => return Err(at("kind must be a string".into())),
        None => return Err(at("missing kind".into())),
    };
    let mut spec = ClassifierSpec::new(kind);
    for (key, value) in table {
        match (key.as_str(), value) {
            ("kind", _) => {}
            ("name", toml::Value::String(s)) => spec.name = s.clone(),
            ("name", _) => return Err(at("name must be a string".into())),
            (_, toml::Value::Integer(i)) => spec = spec.with_param(key, *i as f64),
            (_, toml::Value::Float(f)) => spec = spec.with_param(key, *f),
            (_, _) => return Err(at(format!("hyperparameter {key} must be numeric"))),
        }
    }
    spec.validate().map_err(|e| at(e.to_string()))?;
    Ok(spec)
}

fn resolve(base: &Path, p: PathBuf) -> PathBuf {
    if p.is_absolute() {
        p
    } else {
        base.join(p)
    }
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::parse(&text, base)
    }

    /// Parses config text; relative paths are resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;

        let mut strategies = Vec::new();
        for s in &raw.experiment.strategies {
            let st = s.parse::<Strategy>().map_err(|e| Error::Config(e.to_string()))?;
            if strategies.contains(&st) {
                return Err(Error::Config(format!("strategy {s:?} listed twice")));
            }
            strategies.push(st);
        }

        let mut datasets = Vec::new();
        for d in raw.dataset {
            let source = match (d.csv, d.synthetic) {
                (Some(path), None) => DatasetSource::Csv {
                    path: resolve(base, path),
                    label_column: d
                        .label_column
                        .ok_or_else(|| Error::Config(format!("dataset {:?}: csv source needs label_column", d.name)))?,
                    positive: d
                        .positive
                        .ok_or_else(|| Error::Config(format!("dataset {:?}: csv source needs positive", d.name)))?,
                    allow_missing: d.allow_missing.unwrap_or(false),
                },
                (None, Some(s)) => {
                    if d.label_column.is_some() || d.positive.is_some() || d.allow_missing.is_some() {
                        return Err(Error::Config(format!(
                            "dataset {:?}: label_column/positive/allow_missing apply to csv sources only",
                            d.name
                        )));
                    }
                    DatasetSource::Synthetic(SyntheticSpec {
                        n_total: s.n_total,
                        majority_fraction: s.majority_fraction,
                        n_features: s.n_features,
                        class_separation: s.separation,
                        seed: s.seed,
                    })
                }
                _ => {
                    return Err(Error::Config(format!(
                        "dataset {:?}: give exactly one of csv or synthetic",
                        d.name
                    )))
                }
            };
            datasets.push(DatasetConfig { name: d.name, source });
        }

        let classifiers = raw
            .classifier
            .iter()
            .enumerate()
            .map(|(i, t)| classifier(t, i))
            .collect::<Result<Vec<_>>>()?;

        let mut params = StrategyParams::default();
        if let Some(s) = raw.smote {
            if let Some(a) = &s.amount {
                params.smote_amount = smote_amount(a)?;
            }
            params.smote_k = s.k.unwrap_or(params.smote_k);
        }
        if let Some(p) = raw.pso {
            let c = &mut params.pso;
            c.swarm_size = p.swarm_size.unwrap_or(c.swarm_size);
            c.max_iterations = p.max_iterations.unwrap_or(c.max_iterations);
            c.patience = p.patience.unwrap_or(c.patience);
            c.c1 = p.c1.unwrap_or(c.c1);
            c.c2 = p.c2.unwrap_or(c.c2);
            c.inertia = p.inertia.unwrap_or(c.inertia);
            c.v_max = p.v_max.unwrap_or(c.v_max);
            c.fitness_folds = p.fitness_folds.unwrap_or(c.fitness_folds);
        }
        params.integrated.pso = params.pso.clone();
        if let Some(i) = raw.integrated {
            if let Some(a) = &i.smote_amount {
                params.integrated.smote_amount = smote_amount(a)?;
            }
            params.integrated.smote_k = i.smote_k.unwrap_or(params.integrated.smote_k);
        }

        let cfg = ExperimentConfig {
            datasets,
            strategies,
            params,
            classifiers,
            folds: raw.experiment.folds.unwrap_or(10),
            master_seed: raw.experiment.master_seed,
            output_dir: resolve(base, raw.experiment.output_dir),
            threads: raw.experiment.threads.unwrap_or(0),
            source_text: text.to_string(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.datasets.is_empty() || self.strategies.is_empty() || self.classifiers.is_empty() {
            return Err(Error::Config(
                "need at least one dataset, one strategy and one classifier".into(),
            ));
        }
        if self.folds < 2 {
            return Err(Error::Config(format!("folds must be at least 2, got {}", self.folds)));
        }
        let mut seen = BTreeSet::new();
        for d in &self.datasets {
            if !seen.insert(d.name.as_str()) {
                return Err(Error::Config(format!("dataset name {:?} used twice", d.name)));
            }
        }
        let mut seen = BTreeSet::new();
        for c in &self.classifiers {
            if !seen.insert(c.name.as_str()) {
                return Err(Error::Config(format!("classifier name {:?} used twice", c.name)));
            }
            c.validate()
                .map_err(|e| Error::Config(format!("classifier {:?}: {e}", c.name)))?;
        }
        let mut seen = BTreeSet::new();
        for s in &self.strategies {
            if !seen.insert(*s) {
                return Err(Error::Config(format!("strategy {s} listed twice")));
            }
        }
        Ok(())
    }
}
