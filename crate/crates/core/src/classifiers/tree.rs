//! Binary CART tree with weighted Gini impurity.
//!
//! Splits are `x[feature] <= threshold` with thresholds at midpoints between
//! consecutive distinct values. Equal gains resolve to the lowest feature
//! index, then the lowest threshold.

use rand::seq::index;
use rand::Rng;

use crate::dataset::{Dataset, Label};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeParams {
    /// `None` grows until leaves are pure or too small.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// Features considered per node; `None` means all.
    pub max_features: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: Some(10),
            min_leaf: 2,
            max_features: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf {
        /// Weighted fraction of positive training rows.
        score: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

struct Builder<'a, R> {
    ds: &'a Dataset,
    params: TreeParams,
    rng: &'a mut R,
    nodes: Vec<Node>,
}

#[derive(Clone, Copy)]
struct Candidate {
    gain: f64,
    feature: usize,
    threshold: f64,
}

fn gini_mass(pos: f64, total: f64) -> f64 {
    // total * impurity, with impurity = 2 p (1 - p)
    if total <= 0.0 {
        0.0
    } else {
        2.0 * pos * (total - pos) / total
    }
}

impl<R: Rng> Builder<'_, R> {
    fn grow(&mut self, rows: Vec<(usize, f64)>, depth: usize) -> usize {
        let total: f64 = rows.iter().map(|r| r.1).sum();
        let pos: f64 = rows
            .iter()
            .filter(|r| self.ds.label(r.0).is_positive())
            .map(|r| r.1)
            .sum();
        let score = if total > 0.0 { pos / total } else { 0.5 };
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { score });

        let pure = pos <= 0.0 || pos >= total;
        let depth_done = self.params.max_depth.is_some_and(|d| depth >= d);
        if pure || depth_done || rows.len() < 2 * self.params.min_leaf.max(1) {
            return id;
        }
        let Some(best) = self.best_split(&rows, pos, total) else {
            return id;
        };
        let (left, right): (Vec<_>, Vec<_>) = rows
            .into_iter()
            .partition(|r| self.ds.row(r.0)[best.feature] <= best.threshold);
        let l = self.grow(left, depth + 1);
        let r = self.grow(right, depth + 1);
        self.nodes[id] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left: l,
            right: r,
        };
        id
    }

    fn candidate_features(&mut self) -> Vec<usize> {
        let d = self.ds.n_features();
        match self.params.max_features {
            Some(m) if m < d => {
                let mut f: Vec<usize> = index::sample(self.rng, d, m.max(1)).into_vec();
                f.sort_unstable();
                f
            }
            _ => (0..d).collect(),
        }
    }

    fn best_split(&mut self, rows: &[(usize, f64)], pos: f64, total: f64) -> Option<Candidate> {
        let parent = gini_mass(pos, total);
        let min_leaf = self.params.min_leaf.max(1);
        let mut best: Option<Candidate> = None;
        let mut order: Vec<(f64, bool, f64)> = Vec::with_capacity(rows.len());
        for feature in self.candidate_features() {
            order.clear();
            order.extend(
                rows.iter()
                    .map(|&(i, w)| (self.ds.row(i)[feature], self.ds.label(i).is_positive(), w)),
            );
            order.sort_by(|a, b| a.0.total_cmp(&b.0));
            let (mut lw, mut lp) = (0.0, 0.0);
            for s in 0..order.len() - 1 {
                let (v, is_pos, w) = order[s];
                lw += w;
                if is_pos {
                    lp += w;
                }
                let next = order[s + 1].0;
                if v == next || s + 1 < min_leaf || order.len() - s - 1 < min_leaf {
                    continue;
                }
                let gain = parent - gini_mass(lp, lw) - gini_mass(pos - lp, total - lw);
                if gain > 0.0 && best.is_none_or(|b| gain > b.gain) {
                    let mut threshold = v + (next - v) / 2.0;
                    if threshold >= next {
                        threshold = v;
                    }
                    best = Some(Candidate {
                        gain,
                        feature,
                        threshold,
                    });
                }
            }
        }
        best
    }
}

impl DecisionTree {
    /// Fits on `rows` of `ds` (repeats allowed) with optional per-row weights
    /// aligned with `rows`.
    pub fn fit<R: Rng>(ds: &Dataset, rows: &[usize], weights: Option<&[f64]>, params: TreeParams, rng: &mut R) -> Self {
        let rows: Vec<(usize, f64)> = match weights {
            Some(w) => rows.iter().copied().zip(w.iter().copied()).collect(),
            None => rows.iter().map(|&i| (i, 1.0)).collect(),
        };
        let mut b = Builder {
            ds,
            params,
            rng,
            nodes: Vec::new(),
        };
        b.grow(rows, 0);
        DecisionTree { nodes: b.nodes }
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        let mut id = 0;
        loop {
            match self.nodes[id] {
                Node::Leaf { score } => return score,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => id = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    /// Leaves with an even weighted vote go to the positive class.
    pub fn predict(&self, x: &[f64]) -> Label {
        if self.score(x) >= 0.5 {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    pub fn n_splits(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Split { .. })).count()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], id: usize) -> usize {
            match nodes[id] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }
}
