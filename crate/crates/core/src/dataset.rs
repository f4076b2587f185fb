//! Data model, CSV ingestion, fold planning, scaling and the synthetic
//! two-Gaussian generator.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Column treated as a row identifier rather than a feature.
pub const ID_COLUMN: &str = "DomainName";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn is_positive(self) -> bool {
        self == Label::Positive
    }
}

/// Text used for each class when reading or writing CSV.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelNames {
    pub column: String,
    pub positive: String,
    pub negative: String,
}

impl Default for LabelNames {
    fn default() -> Self {
        LabelNames {
            column: "label".into(),
            positive: "malicious".into(),
            negative: "benign".into(),
        }
    }
}

/// Feature matrix (row-major) with binary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n_features: usize,
    features: Vec<f64>,
    labels: Vec<Label>,
    feature_names: Vec<String>,
    row_ids: Option<Vec<String>>,
    label_names: LabelNames,
}

impl Dataset {
    pub fn from_rows(rows: Vec<Vec<f64>>, labels: Vec<Label>) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        let names = (1..=d).map(|j| format!("x{j}")).collect();
        let mut flat = Vec::with_capacity(rows.len() * d);
        for row in &rows {
            if row.len() != d {
                return Err(Error::ShapeMismatch {
                    expected: d,
                    found: row.len(),
                });
            }
            flat.extend_from_slice(row);
        }
        Self::from_flat(flat, labels, names)
    }

    pub fn from_flat(features: Vec<f64>, labels: Vec<Label>, feature_names: Vec<String>) -> Result<Self> {
        let d = feature_names.len();
        if features.len() != labels.len() * d {
            return Err(Error::ShapeMismatch {
                expected: labels.len() * d,
                found: features.len(),
            });
        }
        Ok(Dataset {
            n_features: d,
            features,
            labels,
            feature_names,
            row_ids: None,
            label_names: LabelNames::default(),
        })
    }

    pub fn with_row_ids(mut self, ids: Vec<String>) -> Result<Self> {
        if ids.len() != self.len() {
            return Err(Error::ShapeMismatch {
                expected: self.len(),
                found: ids.len(),
            });
        }
        self.row_ids = Some(ids);
        Ok(self)
    }

    pub fn with_label_names(mut self, names: LabelNames) -> Self {
        self.label_names = names;
        self
    }

    /// An empty dataset with the same schema.
    pub fn empty_like(&self) -> Self {
        Dataset {
            n_features: self.n_features,
            features: Vec::new(),
            labels: Vec::new(),
            feature_names: self.feature_names.clone(),
            row_ids: self.row_ids.as_ref().map(|_| Vec::new()),
            label_names: self.label_names.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.len()).map(move |i| self.row(i))
    }

    pub fn label(&self, i: usize) -> Label {
        self.labels[i]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn row_ids(&self) -> Option<&[String]> {
        self.row_ids.as_deref()
    }

    pub fn label_names(&self) -> &LabelNames {
        &self.label_names
    }

    pub fn raw_features(&self) -> &[f64] {
        &self.features
    }

    /// (positives, negatives)
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|l| l.is_positive()).count();
        (pos, self.len() - pos)
    }

    pub fn indices_of(&self, label: Label) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.labels[i] == label).collect()
    }

    pub fn push_row(&mut self, row: &[f64], label: Label, id: Option<String>) -> Result<()> {
        if row.len() != self.n_features {
            return Err(Error::ShapeMismatch {
                expected: self.n_features,
                found: row.len(),
            });
        }
        self.features.extend_from_slice(row);
        self.labels.push(label);
        if let Some(ids) = self.row_ids.as_mut() {
            ids.push(id.unwrap_or_else(|| format!("row{}", ids.len())));
        }
        Ok(())
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let mut out = self.empty_like();
        out.features.reserve(indices.len() * self.n_features);
        for &i in indices {
            out.features.extend_from_slice(self.row(i));
            out.labels.push(self.labels[i]);
            if let (Some(dst), Some(src)) = (out.row_ids.as_mut(), self.row_ids.as_ref()) {
                dst.push(src[i].clone());
            }
        }
        out
    }

    pub fn has_missing(&self) -> bool {
        self.features.iter().any(|v| v.is_nan())
    }

    /// Checks the invariants resamplers and classifiers rely on.
    pub fn ensure_usable(&self) -> Result<()> {
        if self.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if let Some(pos) = self.features.iter().position(|v| !v.is_finite()) {
            let row = pos / self.n_features.max(1);
            let column = self.feature_names[pos % self.n_features.max(1)].clone();
            return Err(Error::MissingCell { row: row + 1, column });
        }
        let (positives, negatives) = self.class_counts();
        if positives == 0 || negatives == 0 {
            return Err(Error::SingleClass { positives, negatives });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    /// Keep empty / `NA` cells as NaN instead of failing. They must be imputed
    /// (see [`MedianImputer`]) before the data is consumed.
    pub allow_missing: bool,
}

pub fn load_csv(path: &Path, label_column: &str, positive_label: &str) -> Result<Dataset> {
    load_csv_with(path, label_column, positive_label, &LoadOptions::default())
}

pub fn load_csv_with(path: &Path, label_column: &str, positive_label: &str, opts: &LoadOptions) -> Result<Dataset> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(BufReader::new(file));
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let label_idx = header
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| Error::MissingColumn(label_column.to_string()))?;
    let id_idx = header.iter().position(|h| h == ID_COLUMN);
    let feature_cols: Vec<usize> = (0..header.len())
        .filter(|&j| j != label_idx && Some(j) != id_idx)
        .collect();

    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut ids = Vec::new();
    let mut negative_name: Option<String> = None;
    for (r, record) in reader.records().enumerate() {
        let record = record?;
        let row = r + 1;
        for &j in &feature_cols {
            let cell = record.get(j).unwrap_or("");
            let value = if cell.is_empty() || cell.eq_ignore_ascii_case("na") {
                if !opts.allow_missing {
                    return Err(Error::MissingCell {
                        row,
                        column: header[j].clone(),
                    });
                }
                f64::NAN
            } else {
                match cell.parse::<f64>() {
                    Ok(v) if v.is_finite() => v,
                    _ => {
                        return Err(Error::ParseCell {
                            row,
                            column: header[j].clone(),
                            value: cell.to_string(),
                        })
                    }
                }
            };
            features.push(value);
        }
        let tag = record.get(label_idx).unwrap_or("");
        if tag == positive_label {
            labels.push(Label::Positive);
        } else {
            negative_name.get_or_insert_with(|| tag.to_string());
            labels.push(Label::Negative);
        }
        if let Some(k) = id_idx {
            ids.push(record.get(k).unwrap_or("").to_string());
        }
    }

    let names = feature_cols.iter().map(|&j| header[j].clone()).collect();
    let mut ds = Dataset::from_flat(features, labels, names)?.with_label_names(LabelNames {
        column: label_column.to_string(),
        positive: positive_label.to_string(),
        negative: negative_name.unwrap_or_else(|| "negative".into()),
    });
    if id_idx.is_some() {
        ds = ds.with_row_ids(ids)?;
    }
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let (positives, negatives) = ds.class_counts();
    if positives == 0 || negatives == 0 {
        return Err(Error::SingleClass { positives, negatives });
    }
    Ok(ds)
}

/// Writes `ds` so that [`load_csv`] with the dataset's label names reads it back
/// unchanged.
pub fn write_csv(ds: &Dataset, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_csv_to(ds, file)
}

pub fn write_csv_to<W: Write>(ds: &Dataset, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let names = ds.label_names();
    let mut header: Vec<&str> = Vec::new();
    if ds.row_ids().is_some() {
        header.push(ID_COLUMN);
    }
    header.extend(ds.feature_names().iter().map(String::as_str));
    header.push(&names.column);
    w.write_record(&header)?;
    for i in 0..ds.len() {
        let mut rec: Vec<String> = Vec::with_capacity(header.len());
        if let Some(ids) = ds.row_ids() {
            rec.push(ids[i].clone());
        }
        rec.extend(ds.row(i).iter().map(|v| v.to_string()));
        rec.push(match ds.label(i) {
            Label::Positive => names.positive.clone(),
            Label::Negative => names.negative.clone(),
        });
        w.write_record(&rec)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: "<output>".into(),
        source,
    })?;
    Ok(())
}

/// Parameters of the two-Gaussian stand-in for the web-domain data.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub n_total: usize,
    pub majority_fraction: f64,
    pub n_features: usize,
    /// Euclidean distance between the two class means.
    pub class_separation: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    /// (n_major, n_minor)
    pub fn class_sizes(&self) -> (usize, usize) {
        let n_major = (self.n_total as f64 * self.majority_fraction).round() as usize;
        let n_major = n_major.min(self.n_total);
        (n_major, self.n_total - n_major)
    }
}

/// Majority (negative) rows are drawn from N(0, I); minority (positive) rows
/// from N(mu, I) where mu lies on the all-ones direction at distance
/// `class_separation` from the origin.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Dataset> {
    if spec.n_features == 0 {
        return Err(Error::InvalidParameter("feature count must be positive".into()));
    }
    if !(spec.majority_fraction > 0.5 && spec.majority_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "majority fraction {} outside (0.5, 1)",
            spec.majority_fraction
        )));
    }
    if !(spec.class_separation > 0.0 && spec.class_separation.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "class separation {} must be positive",
            spec.class_separation
        )));
    }
    let (n_major, n_minor) = spec.class_sizes();
    if n_minor < 2 {
        return Err(Error::too_few("minority rows", 2, n_minor));
    }
    if n_major < 2 {
        return Err(Error::too_few("majority rows", 2, n_major));
    }

    let mut order_rng = rng::stream(spec.seed, &[0]);
    let mut labels: Vec<Label> = std::iter::repeat_n(Label::Negative, n_major)
        .chain(std::iter::repeat_n(Label::Positive, n_minor))
        .collect();
    labels.shuffle(&mut order_rng);

    let d = spec.n_features;
    let shift = spec.class_separation / (d as f64).sqrt();
    let mut draw = rng::stream(spec.seed, &[1]);
    let mut features = Vec::with_capacity(spec.n_total * d);
    for &label in &labels {
        let mean = if label.is_positive() { shift } else { 0.0 };
        for _ in 0..d {
            let z: f64 = StandardNormal.sample(&mut draw);
            features.push(mean + z);
        }
    }
    let names = (1..=d).map(|j| format!("x{j}")).collect();
    Dataset::from_flat(features, labels, names)
}

/// Fold index per row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    assignments: Vec<usize>,
    k: usize,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] != fold)
            .collect()
    }
}

pub fn stratified_folds(ds: &Dataset, k: usize, seed: u64) -> Result<FoldPlan> {
    stratified_assign(ds.labels(), k, seed)
}

/// Shuffles each class, then deals positives followed by negatives round-robin,
/// so both the per-fold positive counts and the fold sizes differ by at most one.
pub fn stratified_assign(labels: &[Label], k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("fold count {k} must be at least 2")));
    }
    let mut pos: Vec<usize> = (0..labels.len()).filter(|&i| labels[i].is_positive()).collect();
    let mut neg: Vec<usize> = (0..labels.len()).filter(|&i| !labels[i].is_positive()).collect();
    if pos.len() < k {
        return Err(Error::too_few("positive rows for stratified folds", k, pos.len()));
    }
    if neg.len() < k {
        return Err(Error::too_few("negative rows for stratified folds", k, neg.len()));
    }
    let mut r = rng::stream(seed, &[0x464f_4c44]);
    pos.shuffle(&mut r);
    neg.shuffle(&mut r);
    let mut assignments = vec![0; labels.len()];
    for (slot, &i) in pos.iter().chain(neg.iter()).enumerate() {
        assignments[i] = slot % k;
    }
    Ok(FoldPlan { assignments, k })
}

/// Per-column z-score parameters (population standard deviation).
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizationParams {
    pub means: Vec<f64>,
    pub stddevs: Vec<f64>,
}

pub fn standardize_fit(ds: &Dataset) -> Result<StandardizationParams> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let d = ds.n_features();
    let n = ds.len() as f64;
    let mut means = vec![0.0; d];
    for row in ds.rows() {
        for (m, v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    means.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; d];
    for row in ds.rows() {
        for j in 0..d {
            let c = row[j] - means[j];
            var[j] += c * c;
        }
    }
    let stddevs = var.into_iter().map(|v| (v / n).sqrt()).collect();
    Ok(StandardizationParams { means, stddevs })
}

pub fn standardize_apply(params: &StandardizationParams, ds: &Dataset) -> Result<Dataset> {
    if params.means.len() != ds.n_features() {
        return Err(Error::ShapeMismatch {
            expected: params.means.len(),
            found: ds.n_features(),
        });
    }
    let mut out = ds.clone();
    let d = ds.n_features();
    for (idx, v) in out.features.iter_mut().enumerate() {
        let j = idx % d;
        let sd = params.stddevs[j];
        *v = if sd > 0.0 { (*v - params.means[j]) / sd } else { 0.0 };
    }
    Ok(out)
}

/// Column medians of the non-missing training values.
#[derive(Debug, Clone, PartialEq)]
pub struct MedianImputer {
    pub medians: Vec<f64>,
}

impl MedianImputer {
    pub fn fit(ds: &Dataset) -> Result<Self> {
        let d = ds.n_features();
        let mut medians = Vec::with_capacity(d);
        for j in 0..d {
            let mut col: Vec<f64> = ds.rows().map(|r| r[j]).filter(|v| !v.is_nan()).collect();
            if col.is_empty() {
                return Err(Error::MissingCell {
                    row: 0,
                    column: ds.feature_names()[j].clone(),
                });
            }
            col.sort_by(f64::total_cmp);
            let m = col.len();
            medians.push(if m % 2 == 1 {
                col[m / 2]
            } else {
                0.5 * (col[m / 2 - 1] + col[m / 2])
            });
        }
        Ok(MedianImputer { medians })
    }

    pub fn apply(&self, ds: &Dataset) -> Dataset {
        let mut out = ds.clone();
        let d = ds.n_features();
        for (idx, v) in out.features.iter_mut().enumerate() {
            if v.is_nan() {
                *v = self.medians[idx % d];
            }
        }
        out
    }
}
