//! Gaussian naive Bayes with a variance floor.

use crate::dataset::{Dataset, Label};
use crate::error::{Error, Result};

pub const DEFAULT_VAR_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone)]
struct ClassStats {
    log_prior: f64,
    means: Vec<f64>,
    vars: Vec<f64>,
}

impl ClassStats {
    fn fit(ds: &Dataset, label: Label, floor: f64) -> Self {
        let rows = ds.indices_of(label);
        let n = rows.len() as f64;
        let d = ds.n_features();
        let mut means = vec![0.0; d];
        for &i in &rows {
            for (m, v) in means.iter_mut().zip(ds.row(i)) {
                *m += v;
            }
        }
        means.iter_mut().for_each(|m| *m /= n);
        let mut vars = vec![0.0; d];
        for &i in &rows {
            for ((s, v), m) in vars.iter_mut().zip(ds.row(i)).zip(&means) {
                *s += (v - m) * (v - m);
            }
        }
        vars.iter_mut().for_each(|s| *s = (*s / n).max(floor));
        ClassStats {
            log_prior: (n / ds.len() as f64).ln(),
            means,
            vars,
        }
    }

    fn log_joint(&self, x: &[f64]) -> f64 {
        let ln_2pi = (2.0 * std::f64::consts::PI).ln();
        self.means
            .iter()
            .zip(&self.vars)
            .zip(x)
            .map(|((m, v), xi)| -0.5 * (ln_2pi + v.ln() + (xi - m) * (xi - m) / v))
            .sum::<f64>()
            + self.log_prior
    }
}

#[derive(Debug, Clone)]
pub struct GnbModel {
    pos: ClassStats,
    neg: ClassStats,
}

impl GnbModel {
    pub fn fit(ds: &Dataset, var_floor: f64) -> Result<Self> {
        if !(var_floor > 0.0 && var_floor.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "gnb var_floor must be positive, got {var_floor}"
            )));
        }
        Ok(GnbModel {
            pos: ClassStats::fit(ds, Label::Positive, var_floor),
            neg: ClassStats::fit(ds, Label::Negative, var_floor),
        })
    }

    /// Posterior probabilities `(negative, positive)`; they sum to one.
    pub fn posterior(&self, x: &[f64]) -> (f64, f64) {
        let diff = self.neg.log_joint(x) - self.pos.log_joint(x);
        // logistic of the log-odds, written to avoid overflow on either side
        let p = if diff >= 0.0 {
            let e = (-diff).exp();
            e / (1.0 + e)
        } else {
            1.0 / (1.0 + diff.exp())
        };
        (1.0 - p, p)
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        self.posterior(x).1
    }

    pub fn predict(&self, x: &[f64]) -> Label {
        if self.pos.log_joint(x) >= self.neg.log_joint(x) {
            Label::Positive
        } else {
            Label::Negative
        }
    }
}
