//! SMOTE followed by PSO under-sampling.
//!
//! The minority class is first grown by SMOTE to `m'` rows; the swarm then
//! selects exactly `m'` of the original majority rows, scoring candidates
//! against the enlarged minority. The output is balanced at `m'` per class.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::pso::{pso_undersample, PsoConfig, PsoTrace};
use crate::resampling::{smote, ResampleOutcome, SmoteAmount};
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratedConfig {
    pub smote_amount: SmoteAmount,
    pub smote_k: usize,
    /// `target_ones` is ignored; it is set to the enlarged minority size.
    pub pso: PsoConfig,
}

impl Default for IntegratedConfig {
    fn default() -> Self {
        IntegratedConfig {
            smote_amount: SmoteAmount::Percent(100),
            smote_k: 5,
            pso: PsoConfig::desk_scale(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct IntegratedOutcome {
    pub resampled: ResampleOutcome,
    pub trace: PsoTrace,
    pub enlarged_minority: usize,
    /// The SMOTE-enlarged dataset the swarm selected from.
    pub smoted: Dataset,
    /// The PSO stage's configuration, `target_ones` and `seed` filled in.
    pub pso: PsoConfig,
}

pub fn integrated_resample(ds: &Dataset, cfg: &IntegratedConfig, seed: u64) -> Result<ResampleOutcome> {
    integrated_resample_traced(ds, cfg, seed).map(|o| o.resampled)
}

pub fn integrated_resample_traced(ds: &Dataset, cfg: &IntegratedConfig, seed: u64) -> Result<IntegratedOutcome> {
    let (n_pos, n_neg) = ds.class_counts();
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass {
            positives: n_pos,
            negatives: n_neg,
        });
    }
    let enlarged = n_pos + cfg.smote_amount.synthetic_total(n_pos, n_neg)?;
    if enlarged > n_neg {
        let max_multiple = (n_neg - n_pos.min(n_neg)) / n_pos * 100;
        let hint = if max_multiple == 0 {
            "no whole multiple fits; use a fractional amount such as fraction:0.5".to_string()
        } else {
            format!("largest feasible whole amount is {max_multiple}%")
        };
        return Err(Error::Infeasible(format!(
            "SMOTE would grow the minority to {enlarged} rows, more than the {n_neg} majority rows; {hint}"
        )));
    }

    let grown = smote(ds, cfg.smote_amount, cfg.smote_k, rng::derive_seed(seed, &[0x5307]))?;
    let pso_cfg = PsoConfig {
        target_ones: enlarged,
        seed: rng::derive_seed(seed, &[0x9050]),
        ..cfg.pso.clone()
    };
    let chosen = pso_undersample(&grown.dataset, &pso_cfg)?;

    let mut keep = vec![false; grown.dataset.len()];
    for &i in &chosen.selected {
        keep[i] = true;
    }
    let rows: Vec<usize> = (0..grown.dataset.len())
        .filter(|&i| keep[i] || grown.dataset.label(i).is_positive())
        .collect();
    let resampled = ResampleOutcome {
        dataset: grown.dataset.subset(&rows),
        provenance: rows.iter().map(|&i| grown.provenance[i]).collect(),
    };
    Ok(IntegratedOutcome {
        resampled,
        trace: chosen.trace,
        enlarged_minority: enlarged,
        smoted: grown.dataset,
        pso: pso_cfg,
    })
}
