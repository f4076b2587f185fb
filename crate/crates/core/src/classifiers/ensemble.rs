//! Bagged trees, random forests and discrete AdaBoost.

use rand::Rng;
use rayon::prelude::*;

use super::tree::{DecisionTree, TreeParams};
use crate::dataset::{Dataset, Label};
use crate::rng::stream;

const BOOTSTRAP_SALT: u64 = 0xB007;
const TREE_SALT: u64 = 0x7EE5;

/// Bootstrap sample of `n` row indices for ensemble member `member`.
pub fn bootstrap_indices(n: usize, seed: u64, member: u64) -> Vec<usize> {
    let mut rng = stream(seed, &[BOOTSTRAP_SALT, member]);
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

/// Fits the tree for member `member` on its bootstrap sample.
pub fn bootstrap_tree(ds: &Dataset, params: TreeParams, seed: u64, member: u64) -> DecisionTree {
    let rows = bootstrap_indices(ds.len(), seed, member);
    let mut rng = stream(seed, &[TREE_SALT, member]);
    DecisionTree::fit(ds, &rows, None, params, &mut rng)
}

/// Unweighted vote over bootstrap trees. Bagging uses every feature at each
/// node; a random forest restricts `params.max_features`.
#[derive(Debug, Clone)]
pub struct VotingEnsemble {
    trees: Vec<DecisionTree>,
}

impl VotingEnsemble {
    pub fn fit(ds: &Dataset, n_trees: usize, params: TreeParams, seed: u64) -> Self {
        let trees = (0..n_trees as u64)
            .into_par_iter()
            .map(|m| bootstrap_tree(ds, params, seed, m))
            .collect();
        VotingEnsemble { trees }
    }

    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    fn positive_votes(&self, x: &[f64]) -> usize {
        self.trees.iter().filter(|t| t.predict(x).is_positive()).count()
    }

    /// Share of trees voting positive.
    pub fn score(&self, x: &[f64]) -> f64 {
        self.positive_votes(x) as f64 / self.trees.len() as f64
    }

    /// Even votes go to the positive class.
    pub fn predict(&self, x: &[f64]) -> Label {
        if 2 * self.positive_votes(x) >= self.trees.len() {
            Label::Positive
        } else {
            Label::Negative
        }
    }
}

/// Smallest error used when a stage classifies its weighted sample perfectly.
const MIN_ERROR: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct AdaBoost {
    stages: Vec<(f64, DecisionTree)>,
}

impl AdaBoost {
    /// Discrete boosting with stage weight `0.5 ln((1 - e) / e)`.
    ///
    /// Stops early when a stage has weighted error >= 0.5 (the stage is
    /// dropped unless it is the first) or error 0 (kept, with the error clamped).
    pub fn fit(ds: &Dataset, rounds: usize, params: TreeParams, seed: u64) -> Self {
        let n = ds.len();
        let rows: Vec<usize> = (0..n).collect();
        let mut weights = vec![1.0 / n as f64; n];
        let mut stages = Vec::new();
        for m in 0..rounds as u64 {
            let mut rng = stream(seed, &[TREE_SALT, m]);
            let tree = DecisionTree::fit(ds, &rows, Some(&weights), params, &mut rng);
            let wrong: Vec<bool> = rows.iter().map(|&i| tree.predict(ds.row(i)) != ds.label(i)).collect();
            let total: f64 = weights.iter().sum();
            let err: f64 = weights.iter().zip(&wrong).filter(|p| *p.1).map(|p| p.0).sum::<f64>() / total;
            if err >= 0.5 {
                if stages.is_empty() {
                    stages.push((1.0, tree));
                }
                break;
            }
            let e = err.max(MIN_ERROR);
            let alpha = 0.5 * ((1.0 - e) / e).ln();
            stages.push((alpha, tree));
            if err == 0.0 {
                break;
            }
            let (up, down) = (alpha.exp(), (-alpha).exp());
            for (w, &bad) in weights.iter_mut().zip(&wrong) {
                *w *= if bad { up } else { down };
            }
            let s: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= s);
        }
        AdaBoost { stages }
    }

    pub fn n_stages(&self) -> usize {
        self.stages.len()
    }

    fn margin(&self, x: &[f64]) -> f64 {
        self.stages
            .iter()
            .map(|(a, t)| if t.predict(x).is_positive() { *a } else { -*a })
            .sum()
    }

    /// Weighted vote rescaled to [0, 1].
    pub fn score(&self, x: &[f64]) -> f64 {
        let total: f64 = self.stages.iter().map(|s| s.0).sum();
        (0.5 * (1.0 + self.margin(x) / total)).clamp(0.0, 1.0)
    }

    /// A zero weighted margin goes to the positive class.
    pub fn predict(&self, x: &[f64]) -> Label {
        if self.margin(x) >= 0.0 {
            Label::Positive
        } else {
            Label::Negative
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line() -> Dataset {
        let xs = [-4.0, -3.0, -2.5, -1.0, 0.5, 2.0, 3.0, 3.5];
        let labels = xs
            .iter()
            .map(|&x| if x > 0.0 { Label::Positive } else { Label::Negative })
            .collect();
        Dataset::from_rows(xs.iter().map(|&x| vec![x]).collect(), labels).unwrap()
    }

    #[test]
    fn bootstrap_is_seeded_per_member() {
        let a = bootstrap_indices(50, 1, 0);
        assert_eq!(a, bootstrap_indices(50, 1, 0));
        assert_ne!(a, bootstrap_indices(50, 1, 1));
        assert!(a.iter().all(|&i| i < 50));
    }

    #[test]
    fn adaboost_halts_after_perfect_stage() {
        let ds = line();
        let params = TreeParams {
            max_depth: Some(1),
            min_leaf: 1,
            max_features: None,
        };
        let m = AdaBoost::fit(&ds, 100, params, 0);
        assert_eq!(m.n_stages(), 1);
        for i in 0..ds.len() {
            assert_eq!(m.predict(ds.row(i)), ds.label(i));
        }
    }

    #[test]
    fn adaboost_beats_a_single_stump() {
        // positives in the middle: no single stump separates them
        let xs: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let labels: Vec<Label> = xs
            .iter()
            .map(|&x| {
                if (10.0..20.0).contains(&x) {
                    Label::Positive
                } else {
                    Label::Negative
                }
            })
            .collect();
        let ds = Dataset::from_rows(xs.iter().map(|&x| vec![x]).collect(), labels).unwrap();
        let params = TreeParams {
            max_depth: Some(1),
            min_leaf: 1,
            max_features: None,
        };
        let m = AdaBoost::fit(&ds, 20, params, 0);
        assert!(m.n_stages() > 1);
        let correct = (0..ds.len()).filter(|&i| m.predict(ds.row(i)) == ds.label(i)).count();
        assert_eq!(correct, ds.len());
    }
}
