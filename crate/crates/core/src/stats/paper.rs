//! Shipped reference tables: per-case F-measure, GMean and AUC for six
//! approaches over 32 cases, with the published mean ranks and adjusted
//! p-values, and a side-by-side check of the statistics recomputed from them.

use std::fmt::{self, Write as _};

use super::{format_p2, friedman, friedman_from_ranks, posthoc, PosthocReport, RankSummary, ResultMatrix};
use crate::error::{Error, Result};
use crate::metrics::Metric;

const FMEASURE: &str = include_str!("../../fixtures/table3_fmeasure.csv");
const GMEAN: &str = include_str!("../../fixtures/table4_gmean.csv");
const AUC: &str = include_str!("../../fixtures/table5_auc.csv");
const RANKS: &str = include_str!("../../fixtures/table6_ranks.csv");
const POSTHOC: &str = include_str!("../../fixtures/table7_posthoc.csv");

/// Published mean ranks are given to four decimals.
pub const RANK_TOLERANCE: f64 = 1e-4;
/// Cells printed as `0` are checked against this bound.
pub const ZERO_CELL_BOUND: f64 = 1e-4;

fn key(metric: Metric) -> &'static str {
    match metric {
        Metric::FMeasure => "fmeasure",
        Metric::GMean => "gmean",
        Metric::Auc => "auc",
    }
}

fn fixture_err(what: &str, e: impl fmt::Display) -> Error {
    Error::Fixture(format!("{what}: {e}"))
}

/// The 32 x 6 per-case matrix for `metric`.
pub fn reference_matrix(metric: Metric) -> Result<ResultMatrix> {
    let text = match metric {
        Metric::FMeasure => FMEASURE,
        Metric::GMean => GMEAN,
        Metric::Auc => AUC,
    };
    ResultMatrix::from_csv_str(text, true).map_err(|e| fixture_err(key(metric), e))
}

/// Published mean ranks per approach, in table order.
pub fn reference_ranks(metric: Metric) -> Result<Vec<(String, f64)>> {
    let mut rdr = csv::Reader::from_reader(RANKS.as_bytes());
    let header = rdr.headers().map_err(|e| fixture_err("ranks", e))?.clone();
    let col = header
        .iter()
        .position(|h| h == key(metric))
        .ok_or_else(|| Error::Fixture(format!("ranks: no column {}", key(metric))))?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| fixture_err("ranks", e))?;
        let v = rec[col].parse::<f64>().map_err(|e| fixture_err("ranks", e))?;
        out.push((rec[0].to_string(), v));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Adjustment {
    BonferroniDunn,
    Holm,
    Hochberg,
}

impl Adjustment {
    pub const ALL: [Adjustment; 3] = [Adjustment::BonferroniDunn, Adjustment::Holm, Adjustment::Hochberg];

    pub fn label(self) -> &'static str {
        match self {
            Adjustment::BonferroniDunn => "Bonf",
            Adjustment::Holm => "Holm",
            Adjustment::Hochberg => "Hochberg",
        }
    }

    pub fn pick(self, c: &super::Comparison) -> f64 {
        match self {
            Adjustment::BonferroniDunn => c.p_bonferroni_dunn,
            Adjustment::Holm => c.p_holm,
            Adjustment::Hochberg => c.p_hochberg,
        }
    }
}

/// Published adjusted p-values as printed, per approach:
/// `[Bonferroni-Dunn, Holm, Hochberg]`.
pub fn reference_posthoc(metric: Metric) -> Result<Vec<(String, [String; 3])>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(POSTHOC.as_bytes());
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| fixture_err("posthoc", e))?;
        if rec.len() != 5 {
            return Err(Error::Fixture(format!("posthoc: expected 5 fields, got {}", rec.len())));
        }
        if &rec[0] == key(metric) {
            out.push((
                rec[1].to_string(),
                [rec[2].to_string(), rec[3].to_string(), rec[4].to_string()],
            ));
        }
    }
    Ok(out)
}

/// Whether `computed` agrees with a printed value at its displayed
/// precision. A printed `0` means anything below [`ZERO_CELL_BOUND`].
pub fn p_matches(printed: &str, computed: f64) -> bool {
    if printed == "0" {
        computed < ZERO_CELL_BOUND
    } else {
        format_p2(computed) == printed
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankCheck {
    pub approach: String,
    pub expected: f64,
    pub computed: f64,
}

impl RankCheck {
    pub fn pass(&self) -> bool {
        (self.computed - self.expected).abs() <= RANK_TOLERANCE + 1e-12
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PCheck {
    pub approach: String,
    pub adjustment: Adjustment,
    pub expected: String,
    pub computed: f64,
}

impl PCheck {
    pub fn pass(&self) -> bool {
        p_matches(&self.expected, self.computed)
    }
}

#[derive(Debug, Clone)]
pub struct MetricReplication {
    pub metric: Metric,
    /// Ranks and omnibus statistics computed from the per-case matrix.
    pub summary: RankSummary,
    pub posthoc: PosthocReport,
    pub rank_checks: Vec<RankCheck>,
    pub p_checks: Vec<PCheck>,
    /// The same post-hoc checks driven by the published mean ranks instead.
    pub p_checks_from_reference_ranks: Vec<PCheck>,
}

#[derive(Debug, Clone)]
pub struct PaperReplication {
    pub metrics: Vec<MetricReplication>,
}

fn p_checks(report: &PosthocReport, reference: &[(String, [String; 3])]) -> Result<Vec<PCheck>> {
    let mut out = Vec::new();
    for (approach, printed) in reference {
        let c = report
            .get(approach)
            .ok_or_else(|| Error::Fixture(format!("posthoc: no comparison for {approach}")))?;
        for (adj, expected) in Adjustment::ALL.into_iter().zip(printed) {
            out.push(PCheck {
                approach: approach.clone(),
                adjustment: adj,
                expected: expected.clone(),
                computed: adj.pick(c),
            });
        }
    }
    Ok(out)
}

fn replicate_metric(metric: Metric) -> Result<MetricReplication> {
    let matrix = reference_matrix(metric)?;
    let summary = friedman(&matrix)?;
    let report = posthoc(&summary)?;
    let ranks = reference_ranks(metric)?;
    let mut rank_checks = Vec::new();
    for (approach, expected) in &ranks {
        let j = summary
            .column_names
            .iter()
            .position(|n| n == approach)
            .ok_or_else(|| Error::Fixture(format!("ranks: unknown approach {approach}")))?;
        rank_checks.push(RankCheck {
            approach: approach.clone(),
            expected: *expected,
            computed: summary.mean_ranks[j],
        });
    }
    let reference = reference_posthoc(metric)?;
    let p = p_checks(&report, &reference)?;
    let (names, values): (Vec<String>, Vec<f64>) = ranks.into_iter().unzip();
    let from_table = posthoc(&friedman_from_ranks(names, values, matrix.n_rows())?)?;
    let p_alt = p_checks(&from_table, &reference)?;
    Ok(MetricReplication {
        metric,
        summary,
        posthoc: report,
        rank_checks,
        p_checks: p,
        p_checks_from_reference_ranks: p_alt,
    })
}

/// Runs the Friedman and post-hoc procedure on the three shipped matrices and
/// pairs every result with its published value.
pub fn replicate_paper_stats() -> Result<PaperReplication> {
    Ok(PaperReplication {
        metrics: Metric::ALL.into_iter().map(replicate_metric).collect::<Result<_>>()?,
    })
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

impl PaperReplication {
    pub fn rank_checks(&self) -> impl Iterator<Item = &RankCheck> {
        self.metrics.iter().flat_map(|m| &m.rank_checks)
    }

    pub fn p_checks(&self) -> impl Iterator<Item = &PCheck> {
        self.metrics.iter().flat_map(|m| &m.p_checks)
    }

    pub fn ranks_pass(&self) -> bool {
        self.rank_checks().all(RankCheck::pass)
    }

    pub fn p_values_pass(&self) -> bool {
        self.p_checks().all(PCheck::pass)
    }

    pub fn get(&self, metric: Metric) -> Option<&MetricReplication> {
        self.metrics.iter().find(|m| m.metric == metric)
    }

    /// Side-by-side listing, one PASS/FAIL per cell.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for m in &self.metrics {
            let name = m.metric.display_name();
            let s = &m.summary;
            let (d1, d2) = s.f_df();
            let _ = writeln!(out, "== {name} (N = {}, k = {})", s.n_rows, s.k());
            let _ = writeln!(out, "  {:<12} {:>9} {:>9}", "mean rank", "computed", "reference");
            for c in &m.rank_checks {
                let _ = writeln!(
                    out,
                    "  {:<12} {:>9.4} {:>9.4}  {}",
                    c.approach,
                    c.computed,
                    c.expected,
                    verdict(c.pass())
                );
            }
            let _ = writeln!(
                out,
                "  Friedman chi2 = {:.4} (df {d1}), p = {}; Iman-Davenport F = {:.4} (df {d1}, {d2}), p = {}",
                s.friedman_chi2,
                format_p2(s.friedman_p),
                s.iman_davenport_f,
                format_p2(s.iman_davenport_p)
            );
            let _ = writeln!(out, "  control: {}", m.posthoc.control);
            let _ = writeln!(out, "  {:<12} {:<9} {:>9} {:>9}", "vs", "test", "computed", "reference");
            for c in &m.p_checks {
                let _ = writeln!(
                    out,
                    "  {:<12} {:<9} {:>9} {:>9}  {}",
                    c.approach,
                    c.adjustment.label(),
                    format_p2(c.computed),
                    c.expected,
                    verdict(c.pass())
                );
            }
            let alt_fail: Vec<&PCheck> = m.p_checks_from_reference_ranks.iter().filter(|c| !c.pass()).collect();
            let _ = writeln!(
                out,
                "  from reference mean ranks: {}/{} p-value cells match",
                m.p_checks_from_reference_ranks.len() - alt_fail.len(),
                m.p_checks_from_reference_ranks.len()
            );
        }
        let ranks_ok = self.rank_checks().filter(|c| c.pass()).count();
        let p_ok = self.p_checks().filter(|c| c.pass()).count();
        let _ = writeln!(
            out,
            "mean ranks: {ranks_ok}/{} {}; adjusted p-values: {p_ok}/{} {}",
            self.rank_checks().count(),
            verdict(self.ranks_pass()),
            self.p_checks().count(),
            verdict(self.p_values_pass())
        );
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_parse() {
        for m in Metric::ALL {
            let mat = reference_matrix(m).unwrap();
            assert_eq!((mat.n_rows(), mat.n_cols()), (32, 6));
            assert_eq!(reference_ranks(m).unwrap().len(), 6);
            assert_eq!(reference_posthoc(m).unwrap().len(), 5);
        }
    }

    #[test]
    fn zero_cells() {
        assert!(p_matches("0", 3e-8));
        assert!(!p_matches("0", 2e-4));
        assert!(p_matches("1.4E-01", 0.1373));
        assert!(!p_matches("1.4E-01", 0.1451));
    }
}
