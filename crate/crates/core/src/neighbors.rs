//! Brute-force Euclidean neighbour search.
//!
//! All callers rank by squared distance computed with [`sq_dist`], and break
//! ties by ascending row index, so every consumer sees the same ordering.

use crate::dataset::{Dataset, Label};
use crate::error::{Error, Result};

#[inline]
pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    sq_dist(a, b).sqrt()
}

/// Row-major pool of points.
#[derive(Debug, Clone, Copy)]
pub struct Pool<'a> {
    data: &'a [f64],
    dim: usize,
}

impl<'a> Pool<'a> {
    pub fn new(data: &'a [f64], dim: usize) -> Result<Self> {
        if dim == 0 || !data.len().is_multiple_of(dim) {
            return Err(Error::ShapeMismatch {
                expected: dim,
                found: data.len(),
            });
        }
        Ok(Pool { data, dim })
    }

    pub fn of(ds: &'a Dataset) -> Self {
        Pool {
            data: ds.raw_features(),
            dim: ds.n_features(),
        }
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &'a [f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }
}

/// The `k` pool rows closest to `query`, nearest first.
pub fn knn_indices(query: &[f64], pool: Pool<'_>, k: usize, exclude: Option<usize>) -> Result<Vec<usize>> {
    if query.len() != pool.dim {
        return Err(Error::ShapeMismatch {
            expected: pool.dim,
            found: query.len(),
        });
    }
    let available = pool.len() - usize::from(exclude.is_some_and(|e| e < pool.len()));
    if k > available {
        return Err(Error::too_few("neighbour pool rows", k, available));
    }
    let mut scored: Vec<(f64, usize)> = (0..pool.len())
        .filter(|&i| Some(i) != exclude)
        .map(|i| (sq_dist(query, pool.row(i)), i))
        .collect();
    let by_dist = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < scored.len() && k > 0 {
        scored.select_nth_unstable_by(k - 1, by_dist);
        scored.truncate(k);
    }
    scored.sort_unstable_by(by_dist);
    scored.truncate(k);
    Ok(scored.into_iter().map(|(_, i)| i).collect())
}

/// Index of the nearest row of `pool` restricted to `candidates` (ascending
/// order), ties to the earliest candidate.
pub fn nearest_among(query: &[f64], pool: Pool<'_>, candidates: impl IntoIterator<Item = usize>) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for i in candidates {
        let d = sq_dist(query, pool.row(i));
        if best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, i));
        }
    }
    best.map(|(_, i)| i)
}

/// Label of the single nearest training row.
pub fn nn1_label(train: &Dataset, point: &[f64]) -> Result<Label> {
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if point.len() != train.n_features() {
        return Err(Error::ShapeMismatch {
            expected: train.n_features(),
            found: point.len(),
        });
    }
    let i = nearest_among(point, Pool::of(train), 0..train.len()).expect("non-empty pool");
    Ok(train.label(i))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn pool_from(rows: &[[f64; 2]]) -> Vec<f64> {
        rows.iter().flatten().copied().collect()
    }

    #[test]
    fn excluded_row_is_skipped() {
        let data = pool_from(&[[0.0, 0.0], [1.0, 0.0], [3.0, 0.0]]);
        let pool = Pool::new(&data, 2).unwrap();
        assert_eq!(knn_indices(&[0.0, 0.0], pool, 1, Some(0)).unwrap(), vec![1]);
        assert_eq!(knn_indices(&[0.0, 0.0], pool, 1, None).unwrap(), vec![0]);
        assert_eq!(knn_indices(&[0.0, 0.0], pool, 3, None).unwrap(), vec![0, 1, 2]);
        assert!(knn_indices(&[0.0, 0.0], pool, 3, Some(1)).is_err());
        assert!(knn_indices(&[0.0], pool, 1, None).is_err());
    }

    #[test]
    fn ties_go_to_lower_index() {
        let data = pool_from(&[[2.0, 0.0], [-1.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        let pool = Pool::new(&data, 2).unwrap();
        assert_eq!(knn_indices(&[0.0, 0.0], pool, 3, None).unwrap(), vec![1, 2, 3]);
    }

    #[test]
    fn random_pool_matches_exhaustive_sort() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for _ in 0..50 {
            let data: Vec<f64> = (0..10).map(|_| rng.random_range(-5.0..5.0)).collect();
            let q = [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)];
            let pool = Pool::new(&data, 2).unwrap();
            // oracle: full sort on true Euclidean distance
            let mut all: Vec<(f64, usize)> = (0..5)
                .map(|i| {
                    (
                        ((q[0] - data[2 * i]).powi(2) + (q[1] - data[2 * i + 1]).powi(2)).sqrt(),
                        i,
                    )
                })
                .collect();
            all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            let expect: Vec<usize> = all.iter().take(3).map(|p| p.1).collect();
            assert_eq!(knn_indices(&q, pool, 3, None).unwrap(), expect);
        }
    }

    #[test]
    fn nn1_examples() {
        let ds = Dataset::from_rows(
            vec![vec![-1.0], vec![1.0], vec![5.0]],
            vec![Label::Negative, Label::Positive, Label::Positive],
        )
        .unwrap();
        assert_eq!(nn1_label(&ds, &[5.0]).unwrap(), Label::Positive);
        assert_eq!(nn1_label(&ds, &[0.0]).unwrap(), Label::Negative);
        assert!(nn1_label(&ds.empty_like(), &[0.0]).is_err());
    }

    #[test]
    fn nn1_agrees_with_linear_scan() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let rows: Vec<Vec<f64>> = (0..20)
            .map(|_| vec![rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)])
            .collect();
        let labels: Vec<Label> = (0..20)
            .map(|i| if i % 3 == 0 { Label::Positive } else { Label::Negative })
            .collect();
        let ds = Dataset::from_rows(rows.clone(), labels.clone()).unwrap();
        for _ in 0..100 {
            let q = [rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)];
            let mut best = 0;
            for i in 1..20 {
                let di = (q[0] - rows[i][0]).hypot(q[1] - rows[i][1]);
                let db = (q[0] - rows[best][0]).hypot(q[1] - rows[best][1]);
                if di < db {
                    best = i;
                }
            }
            assert_eq!(nn1_label(&ds, &q).unwrap(), labels[best]);
        }
    }

    proptest! {
        #[test]
        fn distance_is_symmetric(a in prop::collection::vec(-1e3f64..1e3, 4), b in prop::collection::vec(-1e3f64..1e3, 4)) {
            prop_assert_eq!(distance(&a, &b), distance(&b, &a));
            prop_assert_eq!(distance(&a, &a), 0.0);
        }

        #[test]
        fn knn_is_prefix_of_full_order(data in prop::collection::vec(-10f64..10.0, 16), k in 0usize..8) {
            let pool = Pool::new(&data, 2).unwrap();
            let full = knn_indices(&[0.5, -0.5], pool, 8, None).unwrap();
            let part = knn_indices(&[0.5, -0.5], pool, k, None).unwrap();
            prop_assert_eq!(&full[..k], &part[..]);
        }
    }
}
