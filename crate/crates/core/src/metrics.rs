//! Confusion matrix and the imbalance-aware scores derived from it.
//!
//! The positive class is the minority (malicious) class throughout.

use serde::{Deserialize, Serialize};

use crate::dataset::Label;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub true_pos: u64,
    pub false_neg: u64,
    pub false_pos: u64,
    pub true_neg: u64,
}

impl ConfusionMatrix {
    pub fn actual_positives(&self) -> u64 {
        self.true_pos + self.false_neg
    }

    pub fn actual_negatives(&self) -> u64 {
        self.false_pos + self.true_neg
    }

    pub fn total(&self) -> u64 {
        self.actual_positives() + self.actual_negatives()
    }
}

pub fn confusion(predicted: &[Label], actual: &[Label]) -> Result<ConfusionMatrix> {
    if predicted.len() != actual.len() {
        return Err(Error::ShapeMismatch {
            expected: actual.len(),
            found: predicted.len(),
        });
    }
    if actual.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut cm = ConfusionMatrix::default();
    for (p, a) in predicted.iter().zip(actual) {
        match (a, p) {
            (Label::Positive, Label::Positive) => cm.true_pos += 1,
            (Label::Positive, Label::Negative) => cm.false_neg += 1,
            (Label::Negative, Label::Positive) => cm.false_pos += 1,
            (Label::Negative, Label::Negative) => cm.true_neg += 1,
        }
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricReport {
    pub accuracy: f64,
    pub precision: f64,
    /// Also the true-positive rate.
    pub recall: f64,
    pub tn_rate: f64,
    pub fp_rate: f64,
    pub f_measure: f64,
    pub gmean: f64,
    /// Single-point form (1 + TP_rate - FP_rate) / 2 from hard predictions.
    pub auc: f64,
}

pub const METRIC_FIELDS: [&str; 8] = [
    "accuracy",
    "precision",
    "recall",
    "tn_rate",
    "fp_rate",
    "f_measure",
    "gmean",
    "auc",
];

impl MetricReport {
    pub fn fields(&self) -> [f64; 8] {
        [
            self.accuracy,
            self.precision,
            self.recall,
            self.tn_rate,
            self.fp_rate,
            self.f_measure,
            self.gmean,
            self.auc,
        ]
    }

    fn from_fields(v: [f64; 8]) -> Self {
        MetricReport {
            accuracy: v[0],
            precision: v[1],
            recall: v[2],
            tn_rate: v[3],
            fp_rate: v[4],
            f_measure: v[5],
            gmean: v[6],
            auc: v[7],
        }
    }

    /// The eight fields as comma-separated values with 6 decimal places.
    pub fn csv_fields(&self) -> String {
        self.fields()
            .iter()
            .map(|v| format!("{v:.6}"))
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn get(&self, metric: Metric) -> f64 {
        match metric {
            Metric::FMeasure => self.f_measure,
            Metric::GMean => self.gmean,
            Metric::Auc => self.auc,
        }
    }
}

/// The three ranking metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    FMeasure,
    GMean,
    Auc,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::FMeasure, Metric::GMean, Metric::Auc];

    /// Short tag used in file names (`table_fm.csv`, ...).
    pub fn tag(self) -> &'static str {
        match self {
            Metric::FMeasure => "fm",
            Metric::GMean => "gmean",
            Metric::Auc => "auc",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Metric::FMeasure => "F-measure",
            Metric::GMean => "GMean",
            Metric::Auc => "AUC",
        }
    }
}

pub fn score(cm: &ConfusionMatrix) -> Result<MetricReport> {
    let pos = cm.actual_positives();
    let neg = cm.actual_negatives();
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClass {
            positives: pos as usize,
            negatives: neg as usize,
        });
    }
    let tp = cm.true_pos as f64;
    let tn = cm.true_neg as f64;
    let fp = cm.false_pos as f64;
    let recall = tp / pos as f64;
    let tn_rate = tn / neg as f64;
    let fp_rate = fp / neg as f64;
    let precision = if cm.true_pos + cm.false_pos == 0 {
        0.0
    } else {
        tp / (tp + fp)
    };
    let f_measure = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(MetricReport {
        accuracy: (tp + tn) / cm.total() as f64,
        precision,
        recall,
        tn_rate,
        fp_rate,
        f_measure,
        gmean: (tn_rate * recall).sqrt(),
        // 1 - fp_rate == tn_rate, so this is (1 + TP_rate - FP_rate) / 2
        auc: (recall + tn_rate) / 2.0,
    })
}

/// Field-wise arithmetic mean. The result need not satisfy the per-report
/// identities (the mean of gmeans is not the gmean of mean rates).
pub fn aggregate_folds(reports: &[MetricReport]) -> Result<MetricReport> {
    if reports.is_empty() {
        return Err(Error::EmptyDataset);
    }
    // running mean: exact when all reports agree
    let mut acc = reports[0].fields();
    for (k, r) in reports.iter().enumerate().skip(1) {
        for (a, v) in acc.iter_mut().zip(r.fields()) {
            *a += (v - *a) / (k + 1) as f64;
        }
    }
    Ok(MetricReport::from_fields(acc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::{Negative as N, Positive as P};

    fn cm(tp: u64, fn_: u64, fp: u64, tn: u64) -> ConfusionMatrix {
        ConfusionMatrix {
            true_pos: tp,
            false_neg: fn_,
            false_pos: fp,
            true_neg: tn,
        }
    }

    #[test]
    fn confusion_examples() {
        let actual = [P, N, P, N, N];
        let c = confusion(&actual, &actual).unwrap();
        assert_eq!((c.false_neg, c.false_pos), (0, 0));
        let flipped: Vec<Label> = actual.iter().map(|l| if *l == P { N } else { P }).collect();
        let c = confusion(&flipped, &actual).unwrap();
        assert_eq!((c.true_pos, c.true_neg), (0, 0));

        // hand tabulated: pairs (pred, actual)
        // P/P P/P N/P  P/N N/N N/N N/N P/P N/P N/N
        let pred = [P, P, N, P, N, N, N, P, N, N];
        let act = [P, P, P, N, N, N, N, P, P, N];
        assert_eq!(confusion(&pred, &act).unwrap(), cm(3, 2, 1, 4));

        assert!(confusion(&[P], &[P, N]).is_err());
        assert!(confusion(&[], &[]).is_err());
    }

    #[test]
    fn worked_example() {
        let r = score(&cm(50, 5, 5, 40)).unwrap();
        assert!((r.accuracy - 0.90).abs() < 1e-12);
        assert!((r.precision - 50.0 / 55.0).abs() < 1e-12);
        assert!((r.recall - 50.0 / 55.0).abs() < 1e-12);
        assert!((r.f_measure - 50.0 / 55.0).abs() < 1e-12);
        assert!((r.tn_rate - 40.0 / 45.0).abs() < 1e-12);
        let g = ((50.0 / 55.0) * (40.0 / 45.0f64)).sqrt();
        assert!((r.gmean - g).abs() < 1e-12);
        assert!((r.gmean - 0.8990).abs() < 1e-4);
        let auc = (1.0 + 50.0 / 55.0 - 5.0 / 45.0) / 2.0;
        assert!((r.auc - auc).abs() < 1e-12);
        assert!(r.auc > r.gmean);
    }

    #[test]
    fn perfect_and_zero_tp() {
        let r = score(&cm(7, 0, 0, 9)).unwrap();
        assert!(r
            .fields()
            .iter()
            .enumerate()
            .all(|(i, &v)| if i == 4 { v == 0.0 } else { v == 1.0 }));

        let r = score(&cm(0, 4, 3, 7)).unwrap();
        assert_eq!(r.recall, 0.0);
        assert_eq!(r.precision, 0.0);
        assert_eq!(r.f_measure, 0.0);
        assert_eq!(r.gmean, 0.0);
        assert!((r.auc - (1.0 - 0.3) / 2.0).abs() < 1e-15);

        assert!(score(&cm(0, 0, 3, 4)).is_err());
        assert!(score(&cm(2, 1, 0, 0)).is_err());
    }

    #[test]
    fn aggregation() {
        let a = score(&cm(8, 2, 2, 8)).unwrap();
        assert_eq!(aggregate_folds(&[a, a, a]).unwrap(), a);
        let mut x = a;
        x.f_measure = 0.8;
        let mut y = a;
        y.f_measure = 0.6;
        assert!((aggregate_folds(&[x, y]).unwrap().f_measure - 0.7).abs() < 1e-15);
        assert!(aggregate_folds(&[]).is_err());
    }

    #[test]
    fn csv_formatting() {
        let r = score(&cm(1, 1, 1, 2)).unwrap();
        assert_eq!(
            r.csv_fields(),
            "0.600000,0.500000,0.500000,0.666667,0.333333,0.500000,0.577350,0.583333"
        );
    }
}
