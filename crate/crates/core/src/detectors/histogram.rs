//! Histogram-based detectors: HBOS (one histogram per feature) and LODA
//! (histograms over sparse random projections).

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{VectorModel, VectorScorer};
use crate::error::Result;
use crate::types::Matrix;

/// Probability assigned to values outside the fitted range.
pub const OUT_OF_RANGE_DENSITY: f64 = 1e-9;

/// Equal-width histogram over the fitted range. In-range bins are
/// Laplace-smoothed, so any in-range value is strictly more probable than an
/// out-of-range one.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    lo: f64,
    hi: f64,
    counts: Vec<usize>,
    total: usize,
}

impl Histogram {
    pub fn fit(values: &[f64], bins: usize) -> Self {
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut h = Histogram {
            lo,
            hi,
            counts: vec![0; bins],
            total: values.len(),
        };
        for &v in values {
            if let Some(b) = h.bin(v) {
                h.counts[b] += 1;
            }
        }
        h
    }

    fn bin(&self, v: f64) -> Option<usize> {
        if !(self.lo..=self.hi).contains(&v) {
            return None;
        }
        let bins = self.counts.len();
        if self.hi == self.lo {
            return Some(0);
        }
        let b = ((v - self.lo) / (self.hi - self.lo) * bins as f64) as usize;
        Some(b.min(bins - 1))
    }

    /// Smoothed bin probability, or 0 outside the fitted range.
    pub fn probability(&self, v: f64) -> f64 {
        match self.bin(v) {
            Some(b) => (self.counts[b] + 1) as f64 / (self.total + self.counts.len()) as f64,
            None => 0.0,
        }
    }

    /// `-log(p + ε)`.
    pub fn surprise(&self, v: f64) -> f64 {
        -(self.probability(v) + OUT_OF_RANGE_DENSITY).ln()
    }
}

pub struct Hbos {
    pub bins: usize,
}

pub struct FittedHbos {
    histograms: Vec<Histogram>,
}

impl VectorModel for Hbos {
    fn min_rows(&self) -> usize {
        1
    }

    fn fit(&self, rows: &Matrix) -> Result<Box<dyn VectorScorer>> {
        Ok(Box::new(self.fit_rows(rows)))
    }
}

impl Hbos {
    pub fn fit_rows(&self, rows: &Matrix) -> FittedHbos {
        FittedHbos {
            histograms: (0..rows.cols())
                .map(|c| Histogram::fit(&rows.column(c), self.bins))
                .collect(),
        }
    }
}

impl FittedHbos {
    pub fn score(&self, x: &[f64]) -> f64 {
        self.histograms.iter().zip(x).map(|(h, &v)| h.surprise(v)).sum()
    }
}

impl VectorScorer for FittedHbos {
    fn score_rows(&self, rows: &Matrix) -> Vec<f64> {
        (0..rows.rows()).map(|i| self.score(rows.row(i))).collect()
    }
}

pub struct Loda {
    pub projections: usize,
    pub bins: usize,
    pub seed: u64,
}

struct Projection {
    features: Vec<usize>,
    weights: Vec<f64>,
    histogram: Histogram,
}

impl Projection {
    fn apply(&self, x: &[f64]) -> f64 {
        self.features
            .iter()
            .zip(&self.weights)
            .map(|(&f, w)| x[f] * w)
            .sum()
    }
}

pub struct FittedLoda {
    projections: Vec<Projection>,
}

impl VectorModel for Loda {
    fn min_rows(&self) -> usize {
        1
    }

    fn fit(&self, rows: &Matrix) -> Result<Box<dyn VectorScorer>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let d = rows.cols();
        let nonzero = ((d as f64).sqrt().ceil() as usize).clamp(1, d);
        let projections = (0..self.projections)
            .map(|_| {
                let mut features = sample(&mut rng, d, nonzero).into_vec();
                features.sort_unstable();
                let weights: Vec<f64> = features
                    .iter()
                    .map(|_| StandardNormal.sample(&mut rng))
                    .collect();
                let mut p = Projection {
                    features,
                    weights,
                    histogram: Histogram::fit(&[], self.bins),
                };
                let projected: Vec<f64> = (0..rows.rows()).map(|i| p.apply(rows.row(i))).collect();
                p.histogram = Histogram::fit(&projected, self.bins);
                p
            })
            .collect();
        Ok(Box::new(FittedLoda { projections }))
    }
}

impl VectorScorer for FittedLoda {
    fn score_rows(&self, rows: &Matrix) -> Vec<f64> {
        let m = self.projections.len() as f64;
        (0..rows.rows())
            .map(|i| {
                let x = rows.row(i);
                self.projections
                    .iter()
                    .map(|p| p.histogram.surprise(p.apply(x)))
                    .sum::<f64>()
                    / m
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn out_of_range_beats_every_in_range_value() {
        let train: Vec<f64> = (0..200).map(|i| (i as f64 * 0.1).sin()).collect();
        let model = Hbos { bins: 10 }.fit_rows(&Matrix::from_column(&train));
        let outside = model.score(&[1.5]);
        for &v in &train {
            assert!(outside > model.score(&[v]), "value {v}");
        }
    }

    #[test]
    fn empty_bins_still_score_below_outside() {
        let train = [0.0, 0.0, 0.0, 10.0];
        let model = Hbos { bins: 10 }.fit_rows(&Matrix::from_column(&train));
        assert!(model.score(&[11.0]) > model.score(&[5.0]));
        assert!(model.score(&[5.0]) > model.score(&[0.0]));
    }

    #[test]
    fn constant_feature() {
        let h = Histogram::fit(&[2.0; 5], 10);
        assert!(h.probability(2.0) > 0.0);
        assert_eq!(h.probability(2.5), 0.0);
    }

    #[test]
    fn loda_flags_far_points() {
        let rows: Vec<Vec<f64>> = (0..300)
            .map(|i| vec![(i as f64 * 0.3).sin(), (i as f64 * 0.3).cos()])
            .collect();
        let train = Matrix::from_rows(&rows).unwrap();
        let model = Loda { projections: 50, bins: 10, seed: 1 }.fit(&train).unwrap();
        let test = Matrix::from_rows(&[vec![0.0, 1.0], vec![5.0, -5.0]]).unwrap();
        let s = model.score_rows(&test);
        assert!(s[1] > s[0]);
    }
}
