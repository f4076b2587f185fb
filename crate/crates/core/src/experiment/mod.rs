//! Cross-validated strategy x classifier x dataset grids.

pub mod config;
pub mod report;
pub mod runner;
pub mod tables;

use std::fmt;
use std::str::FromStr;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::integrated::{integrated_resample, IntegratedConfig};
use crate::pso::{pso_resample, PsoConfig};
use crate::resampling::{identity, random_oversample, random_undersample, smote, ResampleOutcome, SmoteAmount};

pub use config::{DatasetConfig, DatasetSource, ExperimentConfig};
pub use runner::{run_experiment, ExperimentResult};

/// Resampling strategy applied to each training fold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    Ori,
    Ru,
    Ro,
    Smote,
    Pso,
    Integrated,
}

impl Strategy {
    pub const ALL: [Strategy; 6] = [
        Strategy::Ori,
        Strategy::Ru,
        Strategy::Ro,
        Strategy::Smote,
        Strategy::Pso,
        Strategy::Integrated,
    ];

    /// Config and CSV name.
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Ori => "ori",
            Strategy::Ru => "ru",
            Strategy::Ro => "ro",
            Strategy::Smote => "smote",
            Strategy::Pso => "pso",
            Strategy::Integrated => "integrated",
        }
    }

    /// Column header in metric tables.
    pub fn display_name(self) -> &'static str {
        match self {
            Strategy::Ori => "Ori",
            Strategy::Ru => "RU",
            Strategy::Ro => "RO",
            Strategy::Smote => "SMOTE",
            Strategy::Pso => "PSO",
            Strategy::Integrated => "Integrated",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown strategy {s:?}")))
    }
}

/// Per-strategy settings shared by every cell.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyParams {
    pub smote_amount: SmoteAmount,
    pub smote_k: usize,
    /// Stand-alone PSO; `target_ones` and `seed` are set per call.
    pub pso: PsoConfig,
    pub integrated: IntegratedConfig,
}

impl Default for StrategyParams {
    fn default() -> Self {
        StrategyParams {
            smote_amount: SmoteAmount::ToBalance,
            smote_k: 5,
            pso: PsoConfig::desk_scale(),
            integrated: IntegratedConfig::default(),
        }
    }
}

/// Resamples `ds` with `strategy`. Provenance indices refer to rows of `ds`.
pub fn apply_strategy(strategy: Strategy, ds: &Dataset, params: &StrategyParams, seed: u64) -> Result<ResampleOutcome> {
    match strategy {
        Strategy::Ori => Ok(identity(ds)),
        Strategy::Ru => random_undersample(ds, seed),
        Strategy::Ro => random_oversample(ds, seed),
        Strategy::Smote => smote(ds, params.smote_amount, params.smote_k, seed),
        Strategy::Pso => {
            let cfg = PsoConfig {
                seed,
                ..params.pso.clone()
            };
            pso_resample(ds, &cfg).map(|(out, _)| out)
        }
        Strategy::Integrated => integrated_resample(ds, &params.integrated, seed),
    }
}
