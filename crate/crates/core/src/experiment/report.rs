//! Markdown summary of a finished run, with percentage improvement of every
//! strategy over the unresampled baseline.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::tables::render_markdown;
use super::Strategy;
use crate::error::{Error, Result};
use crate::metrics::Metric;
use crate::stats::{format_p2, friedman, posthoc, ResultMatrix};

/// `100 * (v - ori) / ori` for every non-baseline column. Returns the column
/// names and one row per case.
pub fn improvement_over_ori(matrix: &ResultMatrix) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let base = Strategy::Ori.display_name();
    let ori = matrix
        .column_names()
        .iter()
        .position(|n| n == base)
        .ok_or_else(|| Error::MissingColumn(base.to_string()))?;
    let cols: Vec<usize> = (0..matrix.n_cols()).filter(|&j| j != ori).collect();
    let names = cols.iter().map(|&j| matrix.column_names()[j].clone()).collect();
    let rows = matrix
        .values()
        .iter()
        .map(|row| {
            cols.iter()
                .map(|&j| {
                    if row[ori] == 0.0 {
                        f64::NAN
                    } else {
                        100.0 * (row[j] - row[ori]) / row[ori]
                    }
                })
                .collect()
        })
        .collect();
    Ok((names, rows))
}

fn load_tables(results: &Path) -> Result<Vec<(Metric, ResultMatrix)>> {
    Metric::ALL
        .into_iter()
        .map(|m| {
            let path = results.join(format!("table_{}.csv", m.tag()));
            ResultMatrix::from_csv_path(&path, true).map(|t| (m, t))
        })
        .collect()
}

/// Path of the improvement CSV written next to the markdown report.
pub fn improvement_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
    out.with_file_name(format!("{stem}_improvement.csv"))
}

/// Reads `table_{fm,gmean,auc}.csv` from `results` and writes the markdown
/// report to `out` plus `<stem>_improvement.csv` beside it.
pub fn write_report(results: &Path, out: &Path) -> Result<()> {
    let tables = load_tables(results)?;
    let mut md = String::from("# Resampling comparison\n\n");
    let mut csv = csv::Writer::from_writer(Vec::new());
    csv.write_record(["metric", "dataset", "classifier", "strategy", "improvement_pct"])?;
    for (metric, table) in &tables {
        md.push_str(&render_markdown(table, metric.display_name()));
        md.push('\n');
        if let Ok((names, rows)) = improvement_over_ori(table) {
            let _ = writeln!(md, "### {} improvement over Ori (%)\n", metric.display_name());
            let _ = writeln!(md, "| case | {} |", names.join(" | "));
            let _ = writeln!(md, "|---|{}", "---:|".repeat(names.len()));
            for (label, row) in table.row_labels().iter().zip(&rows) {
                let cells: Vec<String> = row.iter().map(|v| format!("{v:+.2}")).collect();
                let _ = writeln!(md, "| {label} | {} |", cells.join(" | "));
                let (d, c) = label.split_once('/').unwrap_or((label.as_str(), ""));
                for (name, v) in names.iter().zip(row) {
                    csv.write_record([metric.tag(), d, c, name.as_str(), &v.to_string()])?;
                }
            }
            md.push('\n');
        }
        if table.n_rows() >= 2 && table.n_cols() >= 2 {
            let summary = friedman(table)?;
            let report = posthoc(&summary)?;
            let _ = writeln!(md, "### {} mean ranks (1 = best)\n", metric.display_name());
            for (n, r) in summary.column_names.iter().zip(&summary.mean_ranks) {
                let _ = writeln!(md, "- {n}: {r:.4}");
            }
            let _ = writeln!(
                md,
                "\nFriedman p = {}, Iman-Davenport p = {}; control {}.\n",
                format_p2(summary.friedman_p),
                format_p2(summary.iman_davenport_p),
                report.control
            );
        }
    }
    let write =
        |path: PathBuf, bytes: Vec<u8>| std::fs::write(&path, bytes).map_err(|source| Error::Io { path, source });
    write(out.to_path_buf(), md.into_bytes())?;
    let bytes = csv.into_inner().map_err(|e| Error::Invariant(e.to_string()))?;
    write(improvement_path(out), bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn improvement_percentages() {
        let m = ResultMatrix::new(
            vec![vec![0.5, 0.6, 0.4], vec![0.8, 0.8, 1.0]],
            vec!["Ori".into(), "SMOTE".into(), "RU".into()],
            true,
        )
        .unwrap();
        let (names, rows) = improvement_over_ori(&m).unwrap();
        assert_eq!(names, ["SMOTE", "RU"]);
        assert!((rows[0][0] - 20.0).abs() < 1e-12);
        assert!((rows[0][1] + 20.0).abs() < 1e-12);
        assert!((rows[1][1] - 25.0).abs() < 1e-12);
        let no_ori = ResultMatrix::new(vec![vec![0.5], vec![0.4]], vec!["RU".into()], true).unwrap();
        assert!(improvement_over_ori(&no_ori).is_err());
    }

    #[test]
    fn sidecar_name() {
        assert_eq!(
            improvement_path(Path::new("/a/summary.md")),
            PathBuf::from("/a/summary_improvement.csv")
        );
    }
}
