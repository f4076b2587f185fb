//! Baseline resampling strategies: identity, random under-sampling, random
//! over-sampling and SMOTE.
//!
//! Positive rows are the minority class. Every output row carries a
//! [`Provenance`] tag pointing back at rows of the input dataset.

use rand::seq::index;
use rand::Rng;

use crate::dataset::{Dataset, Label};
use crate::error::{Error, Result};
use crate::neighbors::{knn_indices, Pool};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Provenance {
    Original {
        source: usize,
    },
    Replicated {
        source: usize,
    },
    /// `parent + gap * (neighbor - parent)`
    Synthetic {
        parent: usize,
        neighbor: usize,
        gap: f64,
    },
}

impl Provenance {
    /// Input rows this output row was derived from.
    pub fn sources(&self) -> Vec<usize> {
        match *self {
            Provenance::Original { source } | Provenance::Replicated { source } => vec![source],
            Provenance::Synthetic { parent, neighbor, .. } => vec![parent, neighbor],
        }
    }
}

#[derive(Debug, Clone)]
pub struct ResampleOutcome {
    pub dataset: Dataset,
    pub provenance: Vec<Provenance>,
}

impl ResampleOutcome {
    /// Sorted, de-duplicated input rows referenced by any output row.
    pub fn source_rows(&self) -> Vec<usize> {
        let mut rows: Vec<usize> = self.provenance.iter().flat_map(Provenance::sources).collect();
        rows.sort_unstable();
        rows.dedup();
        rows
    }

    /// Writes `row,kind,source,neighbor,gap`, one line per output row.
    pub fn write_provenance_csv(&self, path: &std::path::Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["row", "kind", "source", "neighbor", "gap"])?;
        for (row, p) in self.provenance.iter().enumerate() {
            let (kind, source, neighbor, gap) = match *p {
                Provenance::Original { source } => ("original", source, String::new(), String::new()),
                Provenance::Replicated { source } => ("replicated", source, String::new(), String::new()),
                Provenance::Synthetic { parent, neighbor, gap } => {
                    ("synthetic", parent, neighbor.to_string(), gap.to_string())
                }
            };
            w.write_record([row.to_string(), kind.to_string(), source.to_string(), neighbor, gap])?;
        }
        w.flush().map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn synthetic_count(&self) -> usize {
        self.provenance
            .iter()
            .filter(|p| matches!(p, Provenance::Synthetic { .. }))
            .count()
    }
}

/// How many synthetic minority rows SMOTE should create.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SmoteAmount {
    /// Multiple of 100: each minority row yields `pct / 100` synthetic rows.
    Percent(u32),
    /// Exactly `n_major - n_minor` synthetic rows.
    ToBalance,
    /// Grow the minority to `round(beta * n_major)` rows.
    ToFraction(f64),
}

impl SmoteAmount {
    pub fn synthetic_total(&self, n_minor: usize, n_major: usize) -> Result<usize> {
        match *self {
            SmoteAmount::Percent(p) => {
                if p % 100 != 0 {
                    return Err(Error::InvalidParameter(format!(
                        "SMOTE amount {p}% is not a multiple of 100"
                    )));
                }
                Ok(n_minor * (p / 100) as usize)
            }
            SmoteAmount::ToBalance => Ok(n_major.saturating_sub(n_minor)),
            SmoteAmount::ToFraction(beta) => {
                if !(beta > 0.0 && beta <= 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "SMOTE target fraction {beta} outside (0, 1]"
                    )));
                }
                let target = (beta * n_major as f64).round() as usize;
                Ok(target.saturating_sub(n_minor))
            }
        }
    }
}

impl std::str::FromStr for SmoteAmount {
    type Err = Error;

    /// `200`, `to-balance` or `fraction:0.5`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "to-balance" {
            return Ok(SmoteAmount::ToBalance);
        }
        if let Some(beta) = s.strip_prefix("fraction:") {
            let beta: f64 = beta
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad SMOTE fraction {beta:?}")))?;
            return Ok(SmoteAmount::ToFraction(beta));
        }
        let pct: u32 = s
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad SMOTE amount {s:?}")))?;
        Ok(SmoteAmount::Percent(pct))
    }
}

fn minority_checked(ds: &Dataset) -> Result<(Vec<usize>, Vec<usize>)> {
    let minority = ds.indices_of(Label::Positive);
    let majority = ds.indices_of(Label::Negative);
    if minority.is_empty() {
        return Err(Error::too_few("minority rows", 1, 0));
    }
    if minority.len() > majority.len() {
        return Err(Error::Infeasible(format!(
            "positive class ({}) is larger than negative class ({})",
            minority.len(),
            majority.len()
        )));
    }
    Ok((minority, majority))
}

pub fn identity(ds: &Dataset) -> ResampleOutcome {
    ResampleOutcome {
        dataset: ds.clone(),
        provenance: (0..ds.len()).map(|source| Provenance::Original { source }).collect(),
    }
}

/// Keeps every minority row and a uniform random subset of majority rows of
/// the same size. Row order is preserved.
pub fn random_undersample(ds: &Dataset, seed: u64) -> Result<ResampleOutcome> {
    let (minority, majority) = minority_checked(ds)?;
    let mut r = rng::stream(seed, &[0x5255]);
    let mut keep = vec![false; ds.len()];
    for &i in &minority {
        keep[i] = true;
    }
    for pick in index::sample(&mut r, majority.len(), minority.len()) {
        keep[majority[pick]] = true;
    }
    let rows: Vec<usize> = (0..ds.len()).filter(|&i| keep[i]).collect();
    Ok(ResampleOutcome {
        dataset: ds.subset(&rows),
        provenance: rows.into_iter().map(|source| Provenance::Original { source }).collect(),
    })
}

/// Appends copies of uniformly drawn minority rows until the classes balance.
pub fn random_oversample(ds: &Dataset, seed: u64) -> Result<ResampleOutcome> {
    let (minority, majority) = minority_checked(ds)?;
    let mut r = rng::stream(seed, &[0x524f]);
    let mut out = identity(ds);
    for _ in 0..majority.len() - minority.len() {
        let source = minority[r.random_range(0..minority.len())];
        let id = ds.row_ids().map(|ids| format!("{}#copy", ids[source]));
        out.dataset.push_row(ds.row(source), Label::Positive, id)?;
        out.provenance.push(Provenance::Replicated { source });
    }
    Ok(out)
}

/// Synthetic minority over-sampling.
///
/// For each minority row `x`, its `k` nearest minority neighbours (self
/// excluded) are found; each synthetic row picks one neighbour `y` uniformly
/// and a single gap `g` in [0, 1) and is placed at `x + g * (y - x)`. Original
/// rows are kept unchanged and synthetic rows are appended.
pub fn smote(ds: &Dataset, amount: SmoteAmount, k: usize, seed: u64) -> Result<ResampleOutcome> {
    if k == 0 {
        return Err(Error::InvalidParameter("SMOTE k must be at least 1".into()));
    }
    let minority = ds.indices_of(Label::Positive);
    let n_major = ds.len() - minority.len();
    if minority.len() < k + 1 {
        return Err(Error::too_few(
            format!("minority rows for SMOTE with k={k}"),
            k + 1,
            minority.len(),
        ));
    }
    let total = amount.synthetic_total(minority.len(), n_major)?;
    let quotas = allocate_quotas(total, minority.len(), seed);

    let pool_data: Vec<f64> = minority.iter().flat_map(|&i| ds.row(i).iter().copied()).collect();
    let pool = Pool::new(&pool_data, ds.n_features())?;

    let mut out = identity(ds);
    let mut synth = vec![0.0; ds.n_features()];
    for (a, &x_idx) in minority.iter().enumerate() {
        if quotas[a] == 0 {
            continue;
        }
        let neighbours = knn_indices(pool.row(a), pool, k, Some(a))?;
        let mut r = rng::stream(seed, &[0x534d, a as u64]);
        let x = ds.row(x_idx);
        for _ in 0..quotas[a] {
            let b = neighbours[r.random_range(0..k)];
            let y = pool.row(b);
            let gap: f64 = r.random();
            for ((s, &xj), &yj) in synth.iter_mut().zip(x).zip(y) {
                // rounding can push the interpolant one ulp past the endpoint
                *s = (xj + gap * (yj - xj)).clamp(xj.min(yj), xj.max(yj));
            }
            let id = ds
                .row_ids()
                .map(|ids| format!("smote:{}:{}", ids[x_idx], ids[minority[b]]));
            out.dataset.push_row(&synth, Label::Positive, id)?;
            out.provenance.push(Provenance::Synthetic {
                parent: x_idx,
                neighbor: minority[b],
                gap,
            });
        }
    }
    Ok(out)
}

/// Splits `total` over `m` rows: every row gets `total / m`, and a uniformly
/// chosen set of `total % m` rows gets one more.
pub fn allocate_quotas(total: usize, m: usize, seed: u64) -> Vec<usize> {
    let mut quotas = vec![total / m; m];
    let rem = total % m;
    if rem > 0 {
        let mut r = rng::stream(seed, &[0x5155]);
        for i in index::sample(&mut r, m, rem) {
            quotas[i] += 1;
        }
    }
    quotas
}
