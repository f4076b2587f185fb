//! Dataset x classifier by strategy tables of fold-mean metrics.

use std::fmt::Write as _;
use std::path::Path;

use super::ExperimentResult;
use crate::error::{Error, Result};
use crate::metrics::Metric;
use crate::stats::ResultMatrix;

/// Rows follow config order (dataset-major), columns follow the config's
/// strategy order and carry the strategies' display names.
pub fn emit_tables(result: &ExperimentResult, metric: Metric) -> Result<ResultMatrix> {
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for d in &result.datasets {
        for c in &result.classifiers {
            let row = result
                .strategies
                .iter()
                .map(|&s| {
                    result
                        .mean(d, c, s)
                        .map(|r| r.get(metric))
                        .ok_or_else(|| Error::Invariant(format!("incomplete grid: no result for {d}/{c}/{s}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            values.push(row);
            labels.push(format!("{d}/{c}"));
        }
    }
    let names = result.strategies.iter().map(|s| s.display_name().to_string()).collect();
    ResultMatrix::with_row_labels(values, names, labels, true)
}

/// Column indices of the best and worst value in `row` (all ties marked).
/// Rows with a single distinct value get no marks.
pub fn extremes(row: &[f64], higher_is_better: bool) -> (Vec<usize>, Vec<usize>) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = row.iter().copied().fold(f64::INFINITY, f64::min);
    if max == min {
        return (Vec::new(), Vec::new());
    }
    let at = |v: f64| (0..row.len()).filter(|&j| row[j] == v).collect::<Vec<_>>();
    if higher_is_better {
        (at(max), at(min))
    } else {
        (at(min), at(max))
    }
}

/// Markdown table with the best value per row in bold and the worst in italics.
pub fn render_markdown(matrix: &ResultMatrix, title: &str) -> String {
    let mut out = format!("## {title}\n\n| case |");
    for name in matrix.column_names() {
        let _ = write!(out, " {name} |");
    }
    out.push_str("\n|---|");
    out.push_str(&"---:|".repeat(matrix.n_cols()));
    out.push('\n');
    for (label, row) in matrix.row_labels().iter().zip(matrix.values()) {
        let (best, worst) = extremes(row, matrix.higher_is_better());
        let _ = write!(out, "| {label} |");
        for (j, v) in row.iter().enumerate() {
            let cell = format!("{v:.4}");
            if best.contains(&j) {
                let _ = write!(out, " **{cell}** |");
            } else if worst.contains(&j) {
                let _ = write!(out, " _{cell}_ |");
            } else {
                let _ = write!(out, " {cell} |");
            }
        }
        out.push('\n');
    }
    out.push_str("\nBest per row in **bold**, worst in _italics_.\n");
    out
}

/// CSV with `dataset,classifier` label columns and full-precision values,
/// readable back by [`ResultMatrix::from_csv_path`].
pub fn table_csv(matrix: &ResultMatrix) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["dataset".to_string(), "classifier".to_string()];
    header.extend(matrix.column_names().iter().cloned());
    w.write_record(&header)?;
    for (label, row) in matrix.row_labels().iter().zip(matrix.values()) {
        let (d, c) = label.split_once('/').unwrap_or((label.as_str(), ""));
        let mut rec = vec![d.to_string(), c.to_string()];
        rec.extend(row.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Invariant(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Invariant(e.to_string()))
}

/// Writes `table_<tag>.csv` and `table_<tag>.md` into `dir`.
pub fn write_table(matrix: &ResultMatrix, metric: Metric, dir: &Path) -> Result<()> {
    let write = |name: String, text: String| {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(|source| Error::Io { path, source })
    };
    write(format!("table_{}.csv", metric.tag()), table_csv(matrix)?)?;
    write(
        format!("table_{}.md", metric.tag()),
        render_markdown(matrix, metric.display_name()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn marks() {
        assert_eq!(extremes(&[0.5, 0.9, 0.1, 0.9], true), (vec![1, 3], vec![2]));
        assert_eq!(extremes(&[0.5, 0.9, 0.1], false), (vec![2], vec![1]));
        assert_eq!(extremes(&[0.3, 0.3], true), (vec![], vec![]));
    }

    #[test]
    fn csv_round_trip() {
        let m = ResultMatrix::with_row_labels(
            vec![vec![0.1, 1.0 / 3.0], vec![0.5, 0.25]],
            vec!["Ori".into(), "SMOTE".into()],
            vec!["D1/knn".into(), "D1/gnb".into()],
            true,
        )
        .unwrap();
        let text = table_csv(&m).unwrap();
        assert!(text.starts_with("dataset,classifier,Ori,SMOTE\nD1,knn,0.1,0.3333333333333333\n"));
        assert_eq!(ResultMatrix::from_csv_str(&text, true).unwrap(), m);
        let md = render_markdown(&m, "GMean");
        assert!(md.contains("| D1/knn | _0.1000_ | **0.3333** |"));
    }
}
