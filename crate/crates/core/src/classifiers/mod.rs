//! Classifier suite: kNN, Gaussian naive Bayes, a CART tree and three tree
//! ensembles, all trained from a [`ClassifierSpec`].
//!
//! Hyperparameters are a flat name/value map so they can be written directly
//! in experiment config files:
//!
//! | kind            | keys (defaults)                                             |
//! |-----------------|-------------------------------------------------------------|
//! | `knn`           | `k` (10)                                                    |
//! | `gnb`           | `var_floor` (1e-9)                                          |
//! | `tree`          | `max_depth` (10), `min_leaf` (2)                            |
//! | `bagging`       | `mfinal` (100), `max_depth` (5), `min_leaf` (2)             |
//! | `random_forest` | `ntree` (1000), `mtry` (ceil sqrt d), `max_depth` (0), `min_leaf` (1) |
//! | `adaboost`      | `mfinal` (100), `max_depth` (3), `min_leaf` (2)             |
//!
//! A `max_depth` of 0 means unlimited.

pub mod ensemble;
pub mod gnb;
pub mod knn;
pub mod tree;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::dataset::{Dataset, Label};
use crate::error::{Error, Result};
use ensemble::{AdaBoost, VotingEnsemble};
use gnb::GnbModel;
use knn::KnnModel;
use tree::{DecisionTree, TreeParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassifierKind {
    Knn,
    Gnb,
    Tree,
    Bagging,
    RandomForest,
    AdaBoost,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 6] = [
        ClassifierKind::Knn,
        ClassifierKind::Gnb,
        ClassifierKind::Tree,
        ClassifierKind::Bagging,
        ClassifierKind::RandomForest,
        ClassifierKind::AdaBoost,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::Knn => "knn",
            ClassifierKind::Gnb => "gnb",
            ClassifierKind::Tree => "tree",
            ClassifierKind::Bagging => "bagging",
            ClassifierKind::RandomForest => "random_forest",
            ClassifierKind::AdaBoost => "adaboost",
        }
    }

    /// Accepted hyperparameter names.
    pub fn keys(self) -> &'static [&'static str] {
        match self {
            ClassifierKind::Knn => &["k"],
            ClassifierKind::Gnb => &["var_floor"],
            ClassifierKind::Tree => &["max_depth", "min_leaf"],
            ClassifierKind::Bagging | ClassifierKind::AdaBoost => &["mfinal", "max_depth", "min_leaf"],
            ClassifierKind::RandomForest => &["ntree", "mtry", "max_depth", "min_leaf"],
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ClassifierKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown classifier kind {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierSpec {
    pub kind: ClassifierKind,
    /// Label used in result tables; defaults to the kind name.
    pub name: String,
    pub hyperparameters: BTreeMap<String, f64>,
    pub seed: u64,
}

impl ClassifierSpec {
    pub fn new(kind: ClassifierKind) -> Self {
        ClassifierSpec {
            kind,
            name: kind.as_str().to_string(),
            hyperparameters: BTreeMap::new(),
            seed: 0,
        }
    }

    pub fn with_param(mut self, key: &str, value: f64) -> Self {
        self.hyperparameters.insert(key.to_string(), value);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Rejects unknown keys and out-of-range values.
    pub fn validate(&self) -> Result<()> {
        for key in self.hyperparameters.keys() {
            if !self.kind.keys().contains(&key.as_str()) {
                return Err(Error::InvalidParameter(format!(
                    "{} does not take hyperparameter {key:?} (accepted: {})",
                    self.kind,
                    self.kind.keys().join(", ")
                )));
            }
        }
        // resolve against a nominal width to exercise every range check
        self.resolve(1).map(|_| ())
    }

    fn float(&self, key: &str, default: f64) -> f64 {
        self.hyperparameters.get(key).copied().unwrap_or(default)
    }

    fn count(&self, key: &str, default: usize, min: usize) -> Result<usize> {
        let Some(&v) = self.hyperparameters.get(key) else {
            return Ok(default);
        };
        if !(v.is_finite() && v.fract() == 0.0 && v >= min as f64 && v <= u32::MAX as f64) {
            return Err(Error::InvalidParameter(format!(
                "{} {key} must be an integer >= {min}, got {v}",
                self.kind
            )));
        }
        Ok(v as usize)
    }

    fn tree_params(&self, depth: usize, min_leaf: usize) -> Result<TreeParams> {
        let d = self.count("max_depth", depth, 0)?;
        Ok(TreeParams {
            max_depth: (d > 0).then_some(d),
            min_leaf: self.count("min_leaf", min_leaf, 1)?,
            max_features: None,
        })
    }

    fn resolve(&self, n_features: usize) -> Result<Resolved> {
        Ok(match self.kind {
            ClassifierKind::Knn => Resolved::Knn(self.count("k", 10, 1)?),
            ClassifierKind::Gnb => {
                let floor = self.float("var_floor", gnb::DEFAULT_VAR_FLOOR);
                if !(floor > 0.0 && floor.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "gnb var_floor must be positive, got {floor}"
                    )));
                }
                Resolved::Gnb(floor)
            }
            ClassifierKind::Tree => Resolved::Tree(self.tree_params(10, 2)?),
            ClassifierKind::Bagging => Resolved::Bagging(self.count("mfinal", 100, 1)?, self.tree_params(5, 2)?),
            ClassifierKind::RandomForest => {
                let default_mtry = (n_features as f64).sqrt().ceil() as usize;
                let mtry = self.count("mtry", default_mtry.max(1), 1)?;
                let mut params = self.tree_params(0, 1)?;
                params.max_features = Some(mtry.min(n_features));
                Resolved::Forest(self.count("ntree", 1000, 1)?, params)
            }
            ClassifierKind::AdaBoost => Resolved::AdaBoost(self.count("mfinal", 100, 1)?, self.tree_params(3, 2)?),
        })
    }
}

enum Resolved {
    Knn(usize),
    Gnb(f64),
    Tree(TreeParams),
    Bagging(usize, TreeParams),
    Forest(usize, TreeParams),
    AdaBoost(usize, TreeParams),
}

#[derive(Debug, Clone)]
enum Fitted {
    Knn(KnnModel),
    Gnb(GnbModel),
    Tree(DecisionTree),
    Ensemble(VotingEnsemble),
    AdaBoost(AdaBoost),
}

/// Immutable fitted classifier.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    kind: ClassifierKind,
    n_features: usize,
    fitted: Fitted,
}

pub fn train(spec: &ClassifierSpec, ds: &Dataset) -> Result<TrainedModel> {
    spec.validate()?;
    ds.ensure_usable()?;
    let fitted = match spec.resolve(ds.n_features())? {
        Resolved::Knn(k) => Fitted::Knn(KnnModel::fit(ds, k)?),
        Resolved::Gnb(floor) => Fitted::Gnb(GnbModel::fit(ds, floor)?),
        Resolved::Tree(params) => {
            let rows: Vec<usize> = (0..ds.len()).collect();
            let mut rng = crate::rng::stream(spec.seed, &[]);
            Fitted::Tree(DecisionTree::fit(ds, &rows, None, params, &mut rng))
        }
        Resolved::Bagging(n, params) | Resolved::Forest(n, params) => {
            Fitted::Ensemble(VotingEnsemble::fit(ds, n, params, spec.seed))
        }
        Resolved::AdaBoost(n, params) => Fitted::AdaBoost(AdaBoost::fit(ds, n, params, spec.seed)),
    };
    Ok(TrainedModel {
        kind: spec.kind,
        n_features: ds.n_features(),
        fitted,
    })
}

impl TrainedModel {
    pub fn kind(&self) -> ClassifierKind {
        self.kind
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_features {
            return Err(Error::ShapeMismatch {
                expected: self.n_features,
                found: x.len(),
            });
        }
        Ok(())
    }

    pub fn predict_row(&self, x: &[f64]) -> Result<Label> {
        self.check(x)?;
        Ok(match &self.fitted {
            Fitted::Knn(m) => m.predict(x)?,
            Fitted::Gnb(m) => m.predict(x),
            Fitted::Tree(m) => m.predict(x),
            Fitted::Ensemble(m) => m.predict(x),
            Fitted::AdaBoost(m) => m.predict(x),
        })
    }

    /// Positive-class score in [0, 1].
    pub fn score_row(&self, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        Ok(match &self.fitted {
            Fitted::Knn(m) => m.score(x)?,
            Fitted::Gnb(m) => m.score(x),
            Fitted::Tree(m) => m.score(x),
            Fitted::Ensemble(m) => m.score(x),
            Fitted::AdaBoost(m) => m.score(x),
        })
    }

    /// One label per row of `features`; the labels of `features` are ignored.
    pub fn predict(&self, features: &Dataset) -> Result<Vec<Label>> {
        if features.n_features() != self.n_features {
            return Err(Error::ShapeMismatch {
                expected: self.n_features,
                found: features.n_features(),
            });
        }
        features.rows().map(|x| self.predict_row(x)).collect()
    }

    pub fn scores(&self, features: &Dataset) -> Result<Vec<f64>> {
        features.rows().map(|x| self.score_row(x)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate_synthetic, SyntheticSpec};

    fn blobs() -> Dataset {
        generate_synthetic(&SyntheticSpec {
            n_total: 120,
            majority_fraction: 0.75,
            n_features: 3,
            class_separation: 3.0,
            seed: 11,
        })
        .unwrap()
    }

    fn small(kind: ClassifierKind) -> ClassifierSpec {
        let spec = ClassifierSpec::new(kind).with_seed(5);
        match kind {
            ClassifierKind::Bagging | ClassifierKind::AdaBoost => spec.with_param("mfinal", 10.0),
            ClassifierKind::RandomForest => spec.with_param("ntree", 25.0),
            _ => spec,
        }
    }

    #[test]
    fn every_kind_trains_and_predicts() {
        let ds = blobs();
        for kind in ClassifierKind::ALL {
            let m = train(&small(kind), &ds).unwrap();
            let pred = m.predict(&ds).unwrap();
            assert_eq!(pred.len(), ds.len());
            let acc = pred.iter().zip(ds.labels()).filter(|(p, a)| p == a).count() as f64 / ds.len() as f64;
            assert!(acc > 0.8, "{kind}: training accuracy {acc}");
            for s in m.scores(&ds).unwrap() {
                assert!((0.0..=1.0).contains(&s));
            }
            assert!(m.predict_row(&[0.0]).is_err());
        }
    }

    #[test]
    fn training_is_deterministic() {
        let ds = blobs();
        for kind in [ClassifierKind::RandomForest, ClassifierKind::Bagging] {
            let a = train(&small(kind), &ds).unwrap().scores(&ds).unwrap();
            let b = train(&small(kind), &ds).unwrap().scores(&ds).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let ds = blobs();
        let one_class = ds.subset(&ds.indices_of(Label::Negative));
        assert!(matches!(
            train(&ClassifierSpec::new(ClassifierKind::Tree), &one_class),
            Err(Error::SingleClass { .. })
        ));
        for spec in [
            ClassifierSpec::new(ClassifierKind::Knn).with_param("k", 0.0),
            ClassifierSpec::new(ClassifierKind::Knn).with_param("k", 2.5),
            ClassifierSpec::new(ClassifierKind::Knn).with_param("ntree", 3.0),
            ClassifierSpec::new(ClassifierKind::Gnb).with_param("var_floor", -1.0),
            ClassifierSpec::new(ClassifierKind::Tree).with_param("min_leaf", 0.0),
        ] {
            assert!(matches!(train(&spec, &ds), Err(Error::InvalidParameter(_))), "{spec:?}");
        }
        assert!("svm".parse::<ClassifierKind>().is_err());
        assert_eq!(
            "random_forest".parse::<ClassifierKind>().unwrap(),
            ClassifierKind::RandomForest
        );
    }
}
