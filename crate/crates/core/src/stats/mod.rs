//! Friedman / Iman-Davenport omnibus tests and post-hoc comparisons of every
//! approach against a control (the approach with the lowest mean rank).

pub mod paper;
pub mod special;

use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use special::{chi_square_sf, f_sf, normal_sf};

/// Columns treated as row labels rather than approaches.
pub const LABEL_COLUMNS: [&str; 3] = ["dataset", "classifier", "case"];

/// Rows are cases (dataset x classifier), columns are approaches. The rank
/// tests need at least two of each; smaller matrices are still valid tables.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultMatrix {
    values: Vec<Vec<f64>>,
    column_names: Vec<String>,
    row_labels: Vec<String>,
    higher_is_better: bool,
}

impl ResultMatrix {
    pub fn new(values: Vec<Vec<f64>>, column_names: Vec<String>, higher_is_better: bool) -> Result<Self> {
        let labels = (1..=values.len()).map(|i| format!("case{i}")).collect();
        Self::with_row_labels(values, column_names, labels, higher_is_better)
    }

    pub fn with_row_labels(
        values: Vec<Vec<f64>>,
        column_names: Vec<String>,
        row_labels: Vec<String>,
        higher_is_better: bool,
    ) -> Result<Self> {
        let k = column_names.len();
        if values.is_empty() || k == 0 {
            return Err(Error::InvalidParameter(format!(
                "result matrix needs at least one row and one column, got {}x{k}",
                values.len()
            )));
        }
        if row_labels.len() != values.len() {
            return Err(Error::ShapeMismatch {
                expected: values.len(),
                found: row_labels.len(),
            });
        }
        for (i, row) in values.iter().enumerate() {
            if row.len() != k {
                return Err(Error::ShapeMismatch {
                    expected: k,
                    found: row.len(),
                });
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::MissingCell {
                    row: i + 1,
                    column: column_names[j].clone(),
                });
            }
        }
        Ok(ResultMatrix {
            values,
            column_names,
            row_labels,
            higher_is_better,
        })
    }

    /// Parses a CSV whose header names the approaches. `dataset`,
    /// `classifier` and `case` columns are joined into the row label; lines
    /// starting with `#` are ignored.
    pub fn from_csv_reader<R: Read>(reader: R, higher_is_better: bool) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header = rdr.headers()?.clone();
        let is_label = |h: &str| LABEL_COLUMNS.contains(&h.to_ascii_lowercase().as_str());
        let value_cols: Vec<usize> = (0..header.len()).filter(|&j| !is_label(&header[j])).collect();
        let label_cols: Vec<usize> = (0..header.len()).filter(|&j| is_label(&header[j])).collect();
        let column_names = value_cols.iter().map(|&j| header[j].to_string()).collect();
        let mut values = Vec::new();
        let mut row_labels = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let mut row = Vec::with_capacity(value_cols.len());
            for &j in &value_cols {
                let cell = rec.get(j).unwrap_or("");
                if cell.is_empty() {
                    return Err(Error::MissingCell {
                        row: i + 1,
                        column: header[j].to_string(),
                    });
                }
                row.push(cell.parse::<f64>().map_err(|_| Error::ParseCell {
                    row: i + 1,
                    column: header[j].to_string(),
                    value: cell.to_string(),
                })?);
            }
            values.push(row);
            let label: Vec<&str> = label_cols.iter().filter_map(|&j| rec.get(j)).collect();
            row_labels.push(if label.is_empty() {
                format!("case{}", i + 1)
            } else {
                label.join("/")
            });
        }
        Self::with_row_labels(values, column_names, row_labels, higher_is_better)
    }

    pub fn from_csv_str(text: &str, higher_is_better: bool) -> Result<Self> {
        Self::from_csv_reader(text.as_bytes(), higher_is_better)
    }

    pub fn from_csv_path(path: &Path, higher_is_better: bool) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_csv_reader(file, higher_is_better)
    }

    pub fn n_rows(&self) -> usize {
        self.values.len()
    }

    pub fn n_cols(&self) -> usize {
        self.column_names.len()
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn higher_is_better(&self) -> bool {
        self.higher_is_better
    }

    /// Per-row ranks, 1 = best; tied cells share the mean of their positions.
    pub fn ranks(&self) -> Vec<Vec<f64>> {
        self.values
            .iter()
            .map(|row| average_ranks(row, self.higher_is_better))
            .collect()
    }
}

/// Average ranks of `row`, where rank 1 goes to the best value.
pub fn average_ranks(row: &[f64], higher_is_better: bool) -> Vec<f64> {
    let mut order: Vec<usize> = (0..row.len()).collect();
    order.sort_by(|&a, &b| {
        let c = row[a].total_cmp(&row[b]);
        if higher_is_better {
            c.reverse()
        } else {
            c
        }
    });
    let mut ranks = vec![0.0; row.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && row[order[end]] == row[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end share their mean
        let shared = (start + 1 + end) as f64 / 2.0;
        for &j in &order[start..end] {
            ranks[j] = shared;
        }
        start = end;
    }
    ranks
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankSummary {
    pub column_names: Vec<String>,
    pub mean_ranks: Vec<f64>,
    pub n_rows: usize,
    pub friedman_chi2: f64,
    pub friedman_p: f64,
    pub iman_davenport_f: f64,
    pub iman_davenport_p: f64,
}

impl RankSummary {
    pub fn k(&self) -> usize {
        self.mean_ranks.len()
    }

    /// Degrees of freedom of the Iman-Davenport statistic.
    pub fn f_df(&self) -> (f64, f64) {
        let k = self.k() as f64;
        let n = self.n_rows as f64;
        (k - 1.0, (k - 1.0) * (n - 1.0))
    }

    /// Index of the lowest mean rank (first on ties).
    pub fn control(&self) -> usize {
        let mut best = 0;
        for (j, &r) in self.mean_ranks.iter().enumerate() {
            if r < self.mean_ranks[best] {
                best = j;
            }
        }
        best
    }
}

pub fn friedman(matrix: &ResultMatrix) -> Result<RankSummary> {
    let n = matrix.n_rows();
    let k = matrix.n_cols();
    let mut sums = vec![0.0; k];
    for row in matrix.ranks() {
        for (s, r) in sums.iter_mut().zip(row) {
            *s += r;
        }
    }
    let mean_ranks = sums.into_iter().map(|s| s / n as f64).collect();
    friedman_from_ranks(matrix.column_names().to_vec(), mean_ranks, n)
}

/// Omnibus statistics from already averaged ranks over `n` cases.
pub fn friedman_from_ranks(column_names: Vec<String>, mean_ranks: Vec<f64>, n: usize) -> Result<RankSummary> {
    let k = mean_ranks.len();
    if n < 2 || k < 2 {
        return Err(Error::InvalidParameter(format!(
            "friedman test needs N >= 2 and k >= 2, got N={n}, k={k}"
        )));
    }
    if column_names.len() != k {
        return Err(Error::ShapeMismatch {
            expected: k,
            found: column_names.len(),
        });
    }
    let (nf, kf) = (n as f64, k as f64);
    let sum_sq: f64 = mean_ranks.iter().map(|r| r * r).sum();
    let chi2 = (12.0 * nf / (kf * (kf + 1.0)) * (sum_sq - kf * (kf + 1.0).powi(2) / 4.0)).max(0.0);
    let denom = nf * (kf - 1.0) - chi2;
    let f = if denom > 0.0 {
        (nf - 1.0) * chi2 / denom
    } else {
        f64::INFINITY
    };
    let friedman_p = chi_square_sf(chi2, kf - 1.0)?;
    let iman_davenport_p = if f.is_finite() {
        f_sf(f, kf - 1.0, (kf - 1.0) * (nf - 1.0))?
    } else {
        0.0
    };
    Ok(RankSummary {
        column_names,
        mean_ranks,
        n_rows: n,
        friedman_chi2: chi2,
        friedman_p,
        iman_davenport_f: f,
        iman_davenport_p,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub approach: String,
    pub mean_rank: f64,
    pub z: f64,
    pub p_raw: f64,
    pub p_bonferroni_dunn: f64,
    pub p_holm: f64,
    pub p_hochberg: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosthocReport {
    pub control: String,
    pub control_rank: f64,
    /// Every non-control approach, in column order.
    pub comparisons: Vec<Comparison>,
    /// Iman-Davenport p-value of the omnibus test the comparisons rest on.
    pub omnibus_p: f64,
}

impl PosthocReport {
    /// Whether the omnibus test rejects at `alpha`; the comparisons are
    /// computed either way.
    pub fn omnibus_significant(&self, alpha: f64) -> bool {
        self.omnibus_p < alpha
    }

    pub fn get(&self, approach: &str) -> Option<&Comparison> {
        self.comparisons.iter().find(|c| c.approach == approach)
    }
}

/// Holm step-down adjustment; output aligned with `p`.
pub fn holm(p: &[f64]) -> Vec<f64> {
    let m = p.len();
    let order = ascending(p);
    let mut out = vec![0.0; m];
    let mut running = 0.0f64;
    for (i, &j) in order.iter().enumerate() {
        running = running.max(((m - i) as f64 * p[j]).min(1.0));
        out[j] = running;
    }
    out
}

/// Hochberg step-up adjustment; output aligned with `p`.
pub fn hochberg(p: &[f64]) -> Vec<f64> {
    let m = p.len();
    let order = ascending(p);
    let mut out = vec![0.0; m];
    let mut running = 1.0f64;
    for (i, &j) in order.iter().enumerate().rev() {
        running = running.min(((m - i) as f64 * p[j]).min(1.0));
        out[j] = running;
    }
    out
}

fn ascending(p: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&a, &b| p[a].total_cmp(&p[b]).then(a.cmp(&b)));
    order
}

pub fn posthoc(ranks: &RankSummary) -> Result<PosthocReport> {
    let k = ranks.k();
    let n = ranks.n_rows;
    if n < 2 || k < 2 {
        return Err(Error::InvalidParameter(format!(
            "post-hoc test needs N >= 2 and k >= 2, got N={n}, k={k}"
        )));
    }
    let c = ranks.control();
    let se = ((k * (k + 1)) as f64 / (6.0 * n as f64)).sqrt();
    let others: Vec<usize> = (0..k).filter(|&j| j != c).collect();
    let z: Vec<f64> = others
        .iter()
        .map(|&j| (ranks.mean_ranks[j] - ranks.mean_ranks[c]) / se)
        .collect();
    let raw: Vec<f64> = z.iter().map(|z| (2.0 * normal_sf(z.abs())).min(1.0)).collect();
    let m = others.len() as f64;
    let holm = holm(&raw);
    let hoch = hochberg(&raw);
    let comparisons = others
        .iter()
        .enumerate()
        .map(|(i, &j)| Comparison {
            approach: ranks.column_names[j].clone(),
            mean_rank: ranks.mean_ranks[j],
            z: z[i],
            p_raw: raw[i],
            p_bonferroni_dunn: (m * raw[i]).min(1.0),
            p_holm: holm[i],
            p_hochberg: hoch[i],
        })
        .collect();
    Ok(PosthocReport {
        control: ranks.column_names[c].clone(),
        control_rank: ranks.mean_ranks[c],
        comparisons,
        omnibus_p: ranks.iman_davenport_p,
    })
}

/// Scientific notation with two significant digits and a two-digit
/// exponent, e.g. `1.2E-02`. Exact zero prints as `0`.
pub fn format_p2(p: f64) -> String {
    if p == 0.0 {
        return "0".to_string();
    }
    let s = format!("{p:.1E}");
    match s.split_once('E') {
        Some((mant, exp)) => {
            let e: i32 = exp.parse().unwrap_or(0);
            let sign = if e < 0 { '-' } else { '+' };
            format!("{mant}E{sign}{:02}", e.abs())
        }
        None => s,
    }
}

pub fn ranks_csv(summary: &RankSummary) -> String {
    let mut out = String::from("approach,mean_rank\n");
    for (name, r) in summary.column_names.iter().zip(&summary.mean_ranks) {
        let _ = writeln!(out, "{name},{r}");
    }
    out
}

pub fn omnibus_csv(summary: &RankSummary) -> String {
    let (d1, d2) = summary.f_df();
    format!(
        "test,statistic,df1,df2,p\nfriedman,{},{},,{}\niman_davenport,{},{},{},{}\n",
        summary.friedman_chi2, d1, summary.friedman_p, summary.iman_davenport_f, d1, d2, summary.iman_davenport_p
    )
}

pub fn posthoc_csv(report: &PosthocReport) -> String {
    let mut out = String::from("control,approach,mean_rank,z,p_raw,p_bonferroni_dunn,p_holm,p_hochberg\n");
    for c in &report.comparisons {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            report.control, c.approach, c.mean_rank, c.z, c.p_raw, c.p_bonferroni_dunn, c.p_holm, c.p_hochberg
        );
    }
    out
}

/// Human-readable summary with p-values at two significant digits.
pub fn render_summary(summary: &RankSummary, report: &PosthocReport) -> String {
    let mut out = String::new();
    let (d1, d2) = summary.f_df();
    let _ = writeln!(out, "N = {}, k = {}", summary.n_rows, summary.k());
    for (name, r) in summary.column_names.iter().zip(&summary.mean_ranks) {
        let _ = writeln!(out, "  {name:<12} mean rank {r:.4}");
    }
    let _ = writeln!(
        out,
        "Friedman chi2 = {:.4} (df {d1}), p = {}",
        summary.friedman_chi2,
        format_p2(summary.friedman_p)
    );
    let _ = writeln!(
        out,
        "Iman-Davenport F = {:.4} (df {d1}, {d2}), p = {}",
        summary.iman_davenport_f,
        format_p2(summary.iman_davenport_p)
    );
    if !report.omnibus_significant(0.05) {
        let _ = writeln!(
            out,
            "note: omnibus test not significant at 0.05; post-hoc results are indicative only"
        );
    }
    let _ = writeln!(
        out,
        "control: {} (mean rank {:.4})",
        report.control, report.control_rank
    );
    let _ = writeln!(
        out,
        "  {:<12} {:>8} {:>9} {:>9} {:>9} {:>9}",
        "vs", "z", "p", "Bonf", "Holm", "Hochberg"
    );
    for c in &report.comparisons {
        let _ = writeln!(
            out,
            "  {:<12} {:>8.4} {:>9} {:>9} {:>9} {:>9}",
            c.approach,
            c.z,
            format_p2(c.p_raw),
            format_p2(c.p_bonferroni_dunn),
            format_p2(c.p_holm),
            format_p2(c.p_hochberg)
        );
    }
    out
}
