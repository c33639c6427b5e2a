//! Isolation forest.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{VectorModel, VectorScorer};
use crate::error::Result;
use crate::types::Matrix;

/// Average path length of an unsuccessful BST search over `n` points:
/// `2 H(n-1) - 2(n-1)/n`, with exact harmonic numbers (so `c(2) = 1`).
pub fn average_path_length(n: usize) -> f64 {
    if n <= 1 {
        return 0.0;
    }
    let harmonic: f64 = (1..n).map(|i| 1.0 / i as f64).sum();
    2.0 * harmonic - 2.0 * (n - 1) as f64 / n as f64
}

/// `2^(-E[h] / c(n))`.
pub fn anomaly_score(mean_path: f64, n: usize) -> f64 {
    let c = average_path_length(n);
    if c == 0.0 {
        return 0.5;
    }
    2f64.powf(-mean_path / c)
}

enum Node {
    Leaf { size: usize },
    Split { feature: usize, value: f64, left: Box<Node>, right: Box<Node> },
}

fn build(rows: &Matrix, idx: &mut [usize], depth: usize, limit: usize, rng: &mut ChaCha8Rng) -> Node {
    if depth >= limit || idx.len() <= 1 {
        return Node::Leaf { size: idx.len() };
    }
    let ranges: Vec<(usize, f64, f64)> = (0..rows.cols())
        .filter_map(|f| {
            let (lo, hi) = idx.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                let v = rows.row(i)[f];
                (lo.min(v), hi.max(v))
            });
            (hi > lo).then_some((f, lo, hi))
        })
        .collect();
    if ranges.is_empty() {
        return Node::Leaf { size: idx.len() };
    }
    let (feature, lo, hi) = ranges[rng.gen_range(0..ranges.len())];
    let value = rng.gen_range(lo..hi);
    let mut split = 0;
    for j in 0..idx.len() {
        if rows.row(idx[j])[feature] < value {
            idx.swap(split, j);
            split += 1;
        }
    }
    let (l, r) = idx.split_at_mut(split);
    Node::Split {
        feature,
        value,
        left: Box::new(build(rows, l, depth + 1, limit, rng)),
        right: Box::new(build(rows, r, depth + 1, limit, rng)),
    }
}

fn path_length(node: &Node, x: &[f64], depth: usize) -> f64 {
    match node {
        Node::Leaf { size } => depth as f64 + average_path_length(*size),
        Node::Split { feature, value, left, right } => {
            let next = if x[*feature] < *value { left } else { right };
            path_length(next, x, depth + 1)
        }
    }
}

pub struct IForestModel {
    pub trees: usize,
    pub subsample: usize,
    pub seed: u64,
}

pub struct FittedIForest {
    trees: Vec<Node>,
    sample_size: usize,
}

impl VectorModel for IForestModel {
    fn min_rows(&self) -> usize {
        1
    }

    fn fit(&self, rows: &Matrix) -> Result<Box<dyn VectorScorer>> {
        let psi = self.subsample.min(rows.rows());
        let limit = (psi.max(2) as f64).log2().ceil() as usize;
        let trees = (0..self.trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                rng.set_stream(t as u64);
                let mut idx = sample(&mut rng, rows.rows(), psi).into_vec();
                build(rows, &mut idx, 0, limit, &mut rng)
            })
            .collect();
        Ok(Box::new(FittedIForest {
            trees,
            sample_size: psi,
        }))
    }
}

impl FittedIForest {
    pub fn score(&self, x: &[f64]) -> f64 {
        let mean = self.trees.iter().map(|t| path_length(t, x, 0)).sum::<f64>() / self.trees.len() as f64;
        anomaly_score(mean, self.sample_size)
    }
}

impl VectorScorer for FittedIForest {
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

    #[test]
    fn path_length_constants() {
        assert_eq!(average_path_length(1), 0.0);
        assert_eq!(average_path_length(2), 1.0);
        // 2 * (1 + 1/2) - 2 * 2/3
        assert!((average_path_length(3) - (3.0 - 4.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn mean_path_equal_to_c_scores_one_half() {
        for n in [2, 10, 256, 1000] {
            assert!((anomaly_score(average_path_length(n), n) - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn isolated_point_scores_higher() {
        let mut rows: Vec<Vec<f64>> = (0..200)
            .map(|i| vec![(i as f64 * 0.1).sin(), (i as f64 * 0.13).cos()])
            .collect();
        rows.push(vec![8.0, 8.0]);
        let m = Matrix::from_rows(&rows).unwrap();
        let model = IForestModel { trees: 100, subsample: 128, seed: 7 }.fit(&m).unwrap();
        let s = model.score_rows(&Matrix::from_rows(&[vec![0.0, 1.0], vec![8.0, 8.0]]).unwrap());
        assert!(s[1] > 0.6 && s[1] > s[0] + 0.1, "{s:?}");
    }
}
