//! Resampling for imbalanced binary classification.
//!
//! The centrepiece is [`integrated::integrated_resample`]: SMOTE grows the
//! minority class, then a binary particle swarm picks an equally sized subset
//! of the majority class. Around it sit the baseline strategies, a small
//! classifier suite, imbalance-aware metrics, Friedman-style rank statistics
//! and a reproducible cross-validation runner.

pub mod classifiers;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod integrated;
pub mod metrics;
pub mod neighbors;
pub mod pso;
pub mod resampling;
pub mod rng;
pub mod stats;

pub use dataset::{Dataset, Label};
pub use error::{Error, Result};
