//! Grid execution: one fold plan per dataset, every strategy resamples the
//! training fold only, every classifier is scored on the untouched test fold.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::{apply_strategy, tables, ExperimentConfig, Strategy};
use crate::classifiers::train;
use crate::dataset::{standardize_apply, standardize_fit, stratified_folds, Dataset, FoldPlan, MedianImputer};
use crate::error::{Error, Result};
use crate::metrics::{aggregate_folds, confusion, score, Metric, MetricReport, METRIC_FIELDS};
use crate::rng::{derive_seed, name_key};

const FOLD_SALT: u64 = 0xF07D;
const RESAMPLE_SALT: u64 = 0x5E5A;
const CLASSIFIER_SALT: u64 = 0xC1A5;

/// Seed of the fold plan for `dataset`.
pub fn fold_seed(master_seed: u64, dataset: &str) -> u64 {
    derive_seed(master_seed, &[FOLD_SALT, name_key(dataset)])
}

pub fn resample_seed(master_seed: u64, dataset: &str, fold: usize, strategy: Strategy) -> u64 {
    derive_seed(
        master_seed,
        &[
            RESAMPLE_SALT,
            name_key(dataset),
            fold as u64,
            name_key(strategy.as_str()),
        ],
    )
}

/// Classifier seeds do not depend on the strategy, so strategies are
/// compared with identically seeded learners.
pub fn classifier_seed(master_seed: u64, dataset: &str, fold: usize, classifier: &str) -> u64 {
    derive_seed(
        master_seed,
        &[CLASSIFIER_SALT, name_key(dataset), fold as u64, name_key(classifier)],
    )
}

/// Preprocessed train/test split of one fold.
#[derive(Debug, Clone)]
pub struct FoldData {
    pub train_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
    pub train: Dataset,
    pub test: Dataset,
}

/// Splits, imputes (if needed) and standardizes with statistics from the
/// training part only.
pub fn prepare_fold(ds: &Dataset, plan: &FoldPlan, fold: usize) -> Result<FoldData> {
    let train_rows = plan.train_indices(fold);
    let test_rows = plan.test_indices(fold);
    let mut train = ds.subset(&train_rows);
    let mut test = ds.subset(&test_rows);
    if ds.has_missing() {
        let imputer = MedianImputer::fit(&train)?;
        train = imputer.apply(&train);
        test = imputer.apply(&test);
    }
    let params = standardize_fit(&train)?;
    Ok(FoldData {
        train: standardize_apply(&params, &train)?,
        test: standardize_apply(&params, &test)?,
        train_rows,
        test_rows,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldRecord {
    pub dataset: String,
    pub classifier: String,
    pub strategy: Strategy,
    pub fold: usize,
    pub report: MetricReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanRecord {
    pub dataset: String,
    pub classifier: String,
    pub strategy: Strategy,
    pub report: MetricReport,
}

/// Which original rows fed one resampled training set.
#[derive(Debug, Clone, PartialEq)]
pub struct Lineage {
    pub dataset: String,
    pub fold: usize,
    pub strategy: Strategy,
    /// Original row indices held out in this fold.
    pub test_rows: Vec<usize>,
    /// Original row indices any resampled row derives from, ascending.
    pub train_sources: Vec<usize>,
    pub resampled_rows: usize,
    pub synthetic_rows: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunProvenance {
    pub config_sha256: String,
    pub master_seed: u64,
    pub folds: usize,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub datasets: Vec<String>,
    pub classifiers: Vec<String>,
    pub strategies: Vec<Strategy>,
    pub folds: usize,
    /// Ordered by dataset, classifier, strategy (config order), then fold.
    pub fold_records: Vec<FoldRecord>,
    /// Same order, one per cell.
    pub means: Vec<MeanRecord>,
    /// Ordered by dataset, fold, strategy.
    pub lineage: Vec<Lineage>,
    pub provenance: RunProvenance,
}

impl ExperimentResult {
    pub fn mean(&self, dataset: &str, classifier: &str, strategy: Strategy) -> Option<&MetricReport> {
        self.means
            .iter()
            .find(|m| m.dataset == dataset && m.classifier == classifier && m.strategy == strategy)
            .map(|m| &m.report)
    }

    pub fn folds_of(&self, dataset: &str, classifier: &str, strategy: Strategy) -> Vec<&MetricReport> {
        self.fold_records
            .iter()
            .filter(|r| r.dataset == dataset && r.classifier == classifier && r.strategy == strategy)
            .map(|r| &r.report)
            .collect()
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    if cfg.threads > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        pool.install(|| run_grid(cfg))
    } else {
        run_grid(cfg)
    }
}

fn leak_check(fold: &FoldData, sources: &[usize], n_rows: usize) -> Result<()> {
    let mut held_out = vec![false; n_rows];
    for &i in &fold.test_rows {
        held_out[i] = true;
    }
    if let Some(&row) = sources.iter().find(|&&i| held_out[i]) {
        return Err(Error::Invariant(format!(
            "test row {row} appears in a resampled training set"
        )));
    }
    Ok(())
}

struct UnitOutput {
    lineage: Lineage,
    records: Vec<FoldRecord>,
}

fn run_unit(
    cfg: &ExperimentConfig,
    name: &str,
    n_rows: usize,
    fold: &FoldData,
    f: usize,
    strategy: Strategy,
) -> Result<UnitOutput> {
    let start = Instant::now();
    let at = |what: &str| format!("dataset {name}, strategy {strategy}, {what}fold {}", f + 1);
    let seed = resample_seed(cfg.master_seed, name, f, strategy);
    let out = apply_strategy(strategy, &fold.train, &cfg.params, seed).map_err(|e| e.context(at("")))?;

    let mut sources: Vec<usize> = out.source_rows().into_iter().map(|i| fold.train_rows[i]).collect();
    sources.sort_unstable();
    sources.dedup();
    leak_check(fold, &sources, n_rows).map_err(|e| e.context(at("")))?;

    let mut records = Vec::with_capacity(cfg.classifiers.len());
    for spec in &cfg.classifiers {
        let ctx = |e: Error| e.context(at(&format!("classifier {}, ", spec.name)));
        let spec = spec
            .clone()
            .with_seed(classifier_seed(cfg.master_seed, name, f, &spec.name));
        let model = train(&spec, &out.dataset).map_err(ctx)?;
        let pred = model.predict(&fold.test).map_err(ctx)?;
        let report = score(&confusion(&pred, fold.test.labels()).map_err(ctx)?).map_err(ctx)?;
        records.push(FoldRecord {
            dataset: name.to_string(),
            classifier: spec.name.clone(),
            strategy,
            fold: f,
            report,
        });
    }
    log::info!(
        "{name} fold {}/{} {strategy}: {} training rows, {} classifiers, {:.2?}",
        f + 1,
        cfg.folds,
        out.dataset.len(),
        cfg.classifiers.len(),
        start.elapsed()
    );
    Ok(UnitOutput {
        lineage: Lineage {
            dataset: name.to_string(),
            fold: f,
            strategy,
            test_rows: fold.test_rows.clone(),
            train_sources: sources,
            resampled_rows: out.dataset.len(),
            synthetic_rows: out.synthetic_count(),
        },
        records,
    })
}

fn run_grid(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let mut fold_records = Vec::new();
    let mut lineage = Vec::new();
    for dcfg in &cfg.datasets {
        let name = dcfg.name.as_str();
        let ds = dcfg.load().map_err(|e| e.context(format!("dataset {name}")))?;
        let (pos, neg) = ds.class_counts();
        log::info!(
            "{name}: {} rows ({pos} positive, {neg} negative), {} features",
            ds.len(),
            ds.n_features()
        );
        let plan = stratified_folds(&ds, cfg.folds, fold_seed(cfg.master_seed, name))
            .map_err(|e| e.context(format!("dataset {name}")))?;
        let folds: Vec<FoldData> = (0..cfg.folds)
            .into_par_iter()
            .map(|f| prepare_fold(&ds, &plan, f).map_err(|e| e.context(format!("dataset {name}, fold {}", f + 1))))
            .collect::<Result<_>>()?;
        let units: Vec<(usize, Strategy)> = (0..cfg.folds)
            .flat_map(|f| cfg.strategies.iter().map(move |&s| (f, s)))
            .collect();
        let outputs: Vec<UnitOutput> = units
            .par_iter()
            .map(|&(f, s)| run_unit(cfg, name, ds.len(), &folds[f], f, s))
            .collect::<Result<_>>()?;
        for out in outputs {
            lineage.push(out.lineage);
            fold_records.extend(out.records);
        }
    }

    let pos = |v: &[String], x: &str| v.iter().position(|n| n == x).unwrap_or(usize::MAX);
    let datasets: Vec<String> = cfg.datasets.iter().map(|d| d.name.clone()).collect();
    let classifiers: Vec<String> = cfg.classifiers.iter().map(|c| c.name.clone()).collect();
    let strat_pos = |s: Strategy| cfg.strategies.iter().position(|&x| x == s).unwrap_or(usize::MAX);
    fold_records.sort_by_key(|r| {
        (
            pos(&datasets, &r.dataset),
            pos(&classifiers, &r.classifier),
            strat_pos(r.strategy),
            r.fold,
        )
    });
    lineage.sort_by_key(|l| (pos(&datasets, &l.dataset), l.fold, strat_pos(l.strategy)));

    let means = fold_records
        .chunks(cfg.folds)
        .map(|cell| {
            let reports: Vec<MetricReport> = cell.iter().map(|r| r.report).collect();
            Ok(MeanRecord {
                dataset: cell[0].dataset.clone(),
                classifier: cell[0].classifier.clone(),
                strategy: cell[0].strategy,
                report: aggregate_folds(&reports)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let expected = datasets.len() * classifiers.len() * cfg.strategies.len() * cfg.folds;
    if fold_records.len() != expected {
        return Err(Error::Invariant(format!(
            "grid produced {} fold reports, expected {expected}",
            fold_records.len()
        )));
    }

    Ok(ExperimentResult {
        datasets,
        classifiers,
        strategies: cfg.strategies.clone(),
        folds: cfg.folds,
        fold_records,
        means,
        lineage,
        provenance: RunProvenance {
            config_sha256: sha256_hex(cfg.source_text.as_bytes()),
            master_seed: cfg.master_seed,
            folds: cfg.folds,
        },
    })
}

fn csv_error(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_reports<'a>(
    path: &Path,
    rows: impl Iterator<Item = (&'a str, &'a str, Strategy, String, &'a MetricReport)>,
) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["dataset", "classifier", "strategy", "fold"];
    header.extend(METRIC_FIELDS);
    w.write_record(&header)?;
    for (d, c, s, fold, report) in rows {
        let mut rec = vec![d.to_string(), c.to_string(), s.as_str().to_string(), fold];
        rec.extend(report.fields().iter().map(|v| format!("{v:.6}")));
        w.write_record(&rec)?;
    }
    w.flush().map_err(csv_error(path))?;
    Ok(())
}

/// Writes the per-fold and fold-mean CSVs, the three metric tables and a
/// provenance record into `dir`.
pub fn write_outputs(result: &ExperimentResult, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(csv_error(dir))?;
    write_reports(
        &dir.join("results_folds.csv"),
        result.fold_records.iter().map(|r| {
            (
                r.dataset.as_str(),
                r.classifier.as_str(),
                r.strategy,
                (r.fold + 1).to_string(),
                &r.report,
            )
        }),
    )?;
    write_reports(
        &dir.join("results_mean.csv"),
        result.means.iter().map(|r| {
            (
                r.dataset.as_str(),
                r.classifier.as_str(),
                r.strategy,
                "mean".to_string(),
                &r.report,
            )
        }),
    )?;
    for metric in Metric::ALL {
        let matrix = tables::emit_tables(result, metric)?;
        tables::write_table(&matrix, metric, dir)?;
    }
    let prov = &result.provenance;
    let text = format!(
        "config_sha256 = {}\nmaster_seed = {}\nfolds = {}\nversion = {}\n",
        prov.config_sha256,
        prov.master_seed,
        prov.folds,
        env!("CARGO_PKG_VERSION")
    );
    let path = dir.join("provenance.txt");
    std::fs::write(&path, text).map_err(csv_error(&path))?;
    Ok(())
}
