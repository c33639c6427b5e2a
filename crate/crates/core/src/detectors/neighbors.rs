//! Nearest-neighbor detectors: k-th neighbor distance and the local outlier
//! factor, both in novelty mode (test points are compared to the train set).

use rayon::prelude::*;

use super::{subsample_rows, VectorModel, VectorScorer};
use crate::error::{Error, Result};
use crate::numeric::euclidean;
use crate::types::Matrix;

/// Indices and distances of the `k` nearest rows of `train` to `x`,
/// ascending by distance (index order breaks ties), skipping `exclude`.
fn nearest(train: &Matrix, x: &[f64], k: usize, exclude: Option<usize>) -> Vec<(f64, usize)> {
    let mut d: Vec<(f64, usize)> = (0..train.rows())
        .filter(|&i| Some(i) != exclude)
        .map(|i| (euclidean(train.row(i), x), i))
        .collect();
    let k = k.min(d.len());
    if k < d.len() {
        d.select_nth_unstable_by(k, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        d.truncate(k);
    }
    d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    d
}

pub struct KnnModel {
    pub k: usize,
    pub max_train: usize,
}

pub struct FittedKnn {
    k: usize,
    train: Matrix,
}

impl KnnModel {
    pub fn fit_rows(&self, rows: &Matrix) -> Result<FittedKnn> {
        if rows.rows() < self.k {
            return Err(Error::InsufficientTrainData {
                needed: self.k,
                got: rows.rows(),
            });
        }
        Ok(FittedKnn {
            k: self.k,
            train: subsample_rows(rows, self.max_train.max(self.k)),
        })
    }
}

impl VectorModel for KnnModel {
    fn min_rows(&self) -> usize {
        self.k
    }

    fn fit(&self, rows: &Matrix) -> Result<Box<dyn VectorScorer>> {
        Ok(Box::new(self.fit_rows(rows)?))
    }
}

impl FittedKnn {
    /// Distance to the k-th nearest train row.
    pub fn score(&self, x: &[f64]) -> f64 {
        nearest(&self.train, x, self.k, None)
            .last()
            .map_or(0.0, |n| n.0)
    }
}

impl VectorScorer for FittedKnn {
    fn score_rows(&self, rows: &Matrix) -> Vec<f64> {
        (0..rows.rows())
            .into_par_iter()
            .map(|i| self.score(rows.row(i)))
            .collect()
    }
}

pub struct LofModel {
    pub k: usize,
    pub max_train: usize,
}

pub struct FittedLof {
    k: usize,
    train: Matrix,
    k_distance: Vec<f64>,
    lrd: Vec<f64>,
}

/// Guards the reachability mean against exact duplicates.
const LRD_EPS: f64 = 1e-10;

impl LofModel {
    pub fn fit_rows(&self, rows: &Matrix) -> Result<FittedLof> {
        let needed = self.k + 1;
        if rows.rows() < needed {
            return Err(Error::InsufficientTrainData {
                needed,
                got: rows.rows(),
            });
        }
        let train = subsample_rows(rows, self.max_train.max(needed));
        let neighbors: Vec<Vec<(f64, usize)>> = (0..train.rows())
            .into_par_iter()
            .map(|i| nearest(&train, train.row(i), self.k, Some(i)))
            .collect();
        let k_distance: Vec<f64> = neighbors.iter().map(|n| n.last().unwrap().0).collect();
        let lrd = neighbors
            .iter()
            .map(|n| local_reachability_density(n, &k_distance))
            .collect();
        Ok(FittedLof {
            k: self.k,
            train,
            k_distance,
            lrd,
        })
    }
}

fn local_reachability_density(neighbors: &[(f64, usize)], k_distance: &[f64]) -> f64 {
    let reach: f64 = neighbors
        .iter()
        .map(|&(d, j)| d.max(k_distance[j]))
        .sum::<f64>()
        / neighbors.len() as f64;
    1.0 / (reach + LRD_EPS)
}

impl VectorModel for LofModel {
    fn min_rows(&self) -> usize {
        self.k + 1
    }

    fn fit(&self, rows: &Matrix) -> Result<Box<dyn VectorScorer>> {
        Ok(Box::new(self.fit_rows(rows)?))
    }
}

impl FittedLof {
    pub fn score(&self, x: &[f64]) -> f64 {
        let neighbors = nearest(&self.train, x, self.k, None);
        let lrd = local_reachability_density(&neighbors, &self.k_distance);
        let mean_neighbor_lrd =
            neighbors.iter().map(|&(_, j)| self.lrd[j]).sum::<f64>() / neighbors.len() as f64;
        mean_neighbor_lrd / lrd
    }
}

impl VectorScorer for FittedLof {
    fn score_rows(&self, rows: &Matrix) -> Vec<f64> {
        (0..rows.rows())
            .into_par_iter()
            .map(|i| self.score(rows.row(i)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Textbook LOF, written out independently with full sorting.
    fn lof_oracle(train: &[f64], k: usize, p: f64) -> f64 {
        let knn = |x: f64, skip: Option<usize>| {
            let mut d: Vec<(f64, usize)> = train
                .iter()
                .enumerate()
                .filter(|(i, _)| Some(*i) != skip)
                .map(|(i, &t)| ((x - t).abs(), i))
                .collect();
            d.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            d.truncate(k);
            d
        };
        let kdist: Vec<f64> = (0..train.len()).map(|i| knn(train[i], Some(i))[k - 1].0).collect();
        let lrd = |nbrs: &[(f64, usize)]| {
            let s: f64 = nbrs.iter().map(|&(d, j)| d.max(kdist[j])).sum();
            k as f64 / s
        };
        let train_lrd: Vec<f64> = (0..train.len()).map(|i| lrd(&knn(train[i], Some(i)))).collect();
        let nbrs = knn(p, None);
        let own = lrd(&nbrs);
        nbrs.iter().map(|&(_, j)| train_lrd[j]).sum::<f64>() / k as f64 / own
    }

    #[test]
    fn lof_reference_case() {
        let train = [0.0, 0.1, 0.2, 10.0];
        let model = LofModel { k: 2, max_train: 100 }
            .fit_rows(&Matrix::from_column(&train))
            .unwrap();
        let far = model.score(&[10.0]);
        let near = model.score(&[0.1]);
        assert!(far > 1.5 && 1.5 > near, "far {far}, near {near}");
        assert!((far - lof_oracle(&train, 2, 10.0)).abs() < 1e-6);
        assert!((near - lof_oracle(&train, 2, 0.1)).abs() < 1e-6);
    }

    #[test]
    fn knn_is_kth_neighbor_distance() {
        let train = Matrix::from_column(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
        let model = KnnModel { k: 2, max_train: 100 }.fit_rows(&train).unwrap();
        assert_eq!(model.score(&[0.0]), 1.0);
        assert_eq!(model.score(&[10.0]), 6.0);
    }

    #[test]
    fn lof_needs_k_plus_one_rows() {
        let err = LofModel { k: 3, max_train: 100 }.fit_rows(&Matrix::from_column(&[1.0, 2.0, 3.0]));
        assert!(matches!(err, Err(Error::InsufficientTrainData { needed: 4, got: 3 })));
    }
}
