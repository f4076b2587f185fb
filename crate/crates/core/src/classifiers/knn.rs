//! Majority-vote k-nearest-neighbour classifier.

use crate::dataset::{Dataset, Label};
use crate::error::{Error, Result};
use crate::neighbors::{knn_indices, Pool};

#[derive(Debug, Clone)]
pub struct KnnModel {
    train: Dataset,
    k: usize,
}

impl KnnModel {
    pub fn fit(ds: &Dataset, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("knn k must be at least 1".into()));
        }
        if k > ds.len() {
            return Err(Error::too_few("training rows for knn", k, ds.len()));
        }
        Ok(KnnModel { train: ds.clone(), k })
    }

    /// Fraction of the k neighbours that are positive.
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        let near = knn_indices(x, Pool::of(&self.train), self.k, None)?;
        let pos = near.iter().filter(|&&i| self.train.label(i).is_positive()).count();
        Ok(pos as f64 / self.k as f64)
    }

    /// Even votes go to the positive class.
    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        let near = knn_indices(x, Pool::of(&self.train), self.k, None)?;
        let pos = near.iter().filter(|&&i| self.train.label(i).is_positive()).count();
        Ok(if 2 * pos >= self.k {
            Label::Positive
        } else {
            Label::Negative
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k1_reproduces_training_labels() {
        let ds = Dataset::from_rows(
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![5.0, 5.0]],
            vec![Label::Negative, Label::Positive, Label::Negative, Label::Positive],
        )
        .unwrap();
        let m = KnnModel::fit(&ds, 1).unwrap();
        for i in 0..ds.len() {
            assert_eq!(m.predict(ds.row(i)).unwrap(), ds.label(i));
        }
    }

    #[test]
    fn split_vote_is_positive() {
        let ds = Dataset::from_rows(
            vec![vec![-1.0], vec![1.0], vec![10.0], vec![11.0]],
            vec![Label::Negative, Label::Positive, Label::Negative, Label::Negative],
        )
        .unwrap();
        let m = KnnModel::fit(&ds, 2).unwrap();
        assert_eq!(m.predict(&[0.0]).unwrap(), Label::Positive);
        assert_eq!(m.score(&[0.0]).unwrap(), 0.5);
        assert!(KnnModel::fit(&ds, 5).is_err());
        assert!(m.predict(&[0.0, 1.0]).is_err());
    }
}
