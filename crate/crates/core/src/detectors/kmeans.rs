//! Lloyd's k-means with k-means++ seeding, and CBLOF on top of it.

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{VectorModel, VectorScorer};
use crate::error::{Error, Result};
use crate::numeric::{euclidean, squared_euclidean};
use crate::types::Matrix;

#[derive(Debug, Clone, Copy)]
pub struct KMeansConfig {
    pub k: usize,
    pub max_iter: usize,
    pub restarts: usize,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct Clustering {
    pub centroids: Vec<Vec<f64>>,
    pub assignment: Vec<usize>,
    pub inertia: f64,
}

impl Clustering {
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.centroids.len()];
        for &a in &self.assignment {
            sizes[a] += 1;
        }
        sizes
    }
}

fn closest(centroids: &[Vec<f64>], x: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let d = squared_euclidean(c, x);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn plus_plus(rows: &Matrix, k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = rows.rows();
    let mut centroids = vec![rows.row(rng.gen_range(0..n)).to_vec()];
    let mut d2: Vec<f64> = (0..n)
        .map(|i| squared_euclidean(rows.row(i), &centroids[0]))
        .collect();
    while centroids.len() < k {
        let next = match WeightedIndex::new(&d2) {
            Ok(w) => w.sample(rng),
            // Every point already coincides with a centroid.
            Err(_) => rng.gen_range(0..n),
        };
        let c = rows.row(next).to_vec();
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(squared_euclidean(rows.row(i), &c));
        }
        centroids.push(c);
    }
    centroids
}

fn lloyd(rows: &Matrix, mut centroids: Vec<Vec<f64>>, max_iter: usize) -> Clustering {
    let n = rows.rows();
    let dim = rows.cols();
    let mut assignment = vec![usize::MAX; n];
    for _ in 0..max_iter {
        let mut changed = false;
        for (i, a) in assignment.iter_mut().enumerate() {
            let (j, _) = closest(&centroids, rows.row(i));
            if *a != j {
                *a = j;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; dim]; centroids.len()];
        let mut counts = vec![0usize; centroids.len()];
        for (i, &a) in assignment.iter().enumerate() {
            counts[a] += 1;
            for (s, v) in sums[a].iter_mut().zip(rows.row(i)) {
                *s += v;
            }
        }
        for (j, c) in centroids.iter_mut().enumerate() {
            // Empty clusters keep their previous centroid.
            if counts[j] > 0 {
                for (cv, s) in c.iter_mut().zip(&sums[j]) {
                    *cv = s / counts[j] as f64;
                }
            }
        }
    }
    let inertia = (0..n)
        .map(|i| squared_euclidean(rows.row(i), &centroids[assignment[i]]))
        .sum();
    Clustering {
        centroids,
        assignment,
        inertia,
    }
}

/// Best of `restarts` seeded runs by inertia (earliest run wins ties).
pub fn kmeans(rows: &Matrix, config: &KMeansConfig) -> Result<Clustering> {
    if rows.rows() < config.k {
        return Err(Error::InsufficientTrainData {
            needed: config.k,
            got: rows.rows(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut best: Option<Clustering> = None;
    for _ in 0..config.restarts {
        let init = plus_plus(rows, config.k, &mut rng);
        let c = lloyd(rows, init, config.max_iter);
        if best.as_ref().is_none_or(|b| c.inertia < b.inertia) {
            best = Some(c);
        }
    }
    Ok(best.expect("restarts >= 1"))
}

pub struct KMeansModel {
    pub config: KMeansConfig,
}

/// Scores a vector by its distance to the nearest centroid.
pub struct FittedKMeans {
    centroids: Vec<Vec<f64>>,
}

impl VectorModel for KMeansModel {
    fn min_rows(&self) -> usize {
        self.config.k
    }

    fn fit(&self, rows: &Matrix) -> Result<Box<dyn VectorScorer>> {
        let c = kmeans(rows, &self.config)?;
        Ok(Box::new(FittedKMeans {
            centroids: c.centroids,
        }))
    }
}

impl VectorScorer for FittedKMeans {
    fn score_rows(&self, rows: &Matrix) -> Vec<f64> {
        (0..rows.rows())
            .map(|i| closest(&self.centroids, rows.row(i)).1.sqrt())
            .collect()
    }
}

/// Cluster-based local outlier factor. Clusters are sorted by size; the
/// large ones are the smallest prefix covering `alpha` of the data (and at
/// least one cluster). A vector in a large cluster scores its distance to
/// that centroid, otherwise its distance to the nearest large centroid; the
/// distance is weighted by the cluster's size.
pub struct CblofModel {
    pub config: KMeansConfig,
    pub alpha: f64,
}

pub struct FittedCblof {
    centroids: Vec<Vec<f64>>,
    sizes: Vec<usize>,
    large: Vec<bool>,
}

impl VectorModel for CblofModel {
    fn min_rows(&self) -> usize {
        self.config.k
    }

    fn fit(&self, rows: &Matrix) -> Result<Box<dyn VectorScorer>> {
        let c = kmeans(rows, &self.config)?;
        let sizes = c.sizes();
        let mut order: Vec<usize> = (0..sizes.len()).collect();
        order.sort_by(|&a, &b| sizes[b].cmp(&sizes[a]).then(a.cmp(&b)));
        let mut large = vec![false; sizes.len()];
        let target = self.alpha * rows.rows() as f64;
        let mut covered = 0usize;
        for &j in &order {
            if covered as f64 >= target || sizes[j] == 0 {
                break;
            }
            large[j] = true;
            covered += sizes[j];
        }
        Ok(Box::new(FittedCblof {
            centroids: c.centroids,
            sizes,
            large,
        }))
    }
}

impl VectorScorer for FittedCblof {
    fn score_rows(&self, rows: &Matrix) -> Vec<f64> {
        (0..rows.rows())
            .map(|i| {
                let x = rows.row(i);
                let (j, _) = closest(&self.centroids, x);
                let d = if self.large[j] {
                    euclidean(x, &self.centroids[j])
                } else {
                    self.centroids
                        .iter()
                        .zip(&self.large)
                        .filter(|(_, &l)| l)
                        .map(|(c, _)| euclidean(x, c))
                        .fold(f64::INFINITY, f64::min)
                };
                d * self.sizes[j].max(1) as f64
            })
            .collect()
    }
}
