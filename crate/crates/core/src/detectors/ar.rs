//! Autoregressive one-step forecaster; the score is the forecast error.

use nalgebra::{DMatrix, DVector};

use super::{Detector, DetectorKind, FittedDetector};
use crate::error::{Error, Result};
use crate::types::{Matrix, Overlap, ScoreSeries};

#[derive(Debug, Clone, Copy)]
pub struct ArForecast {
    pub order: usize,
}

/// Per-channel AR coefficients: intercept followed by lags 1..=p.
struct FittedAr {
    order: usize,
    coefficients: Vec<DVector<f64>>,
}

/// Least-squares AR(p) fit with intercept.
pub fn fit_ar(x: &[f64], p: usize) -> Result<Vec<f64>> {
    let rows = x.len().saturating_sub(p);
    if rows < p + 1 {
        return Err(Error::InsufficientTrainData {
            needed: 2 * p + 1,
            got: x.len(),
        });
    }
    let design = DMatrix::from_fn(rows, p + 1, |r, c| if c == 0 { 1.0 } else { x[r + p - c] });
    let target = DVector::from_fn(rows, |r, _| x[r + p]);
    let beta = design
        .svd(true, true)
        .solve(&target, 1e-12)
        .map_err(|e| Error::DegenerateData(e.to_string()))?;
    Ok(beta.iter().copied().collect())
}

fn predict(beta: &DVector<f64>, x: &[f64], t: usize) -> f64 {
    let p = beta.len() - 1;
    beta[0] + (1..=p).map(|k| beta[k] * x[t - k]).sum::<f64>()
}

impl Detector for ArForecast {
    fn kind(&self) -> DetectorKind {
        DetectorKind::ArForecast
    }

    fn window(&self) -> Option<usize> {
        None
    }

    fn min_train_rows(&self) -> usize {
        2 * self.order + 1
    }

    fn fit(&self, train: &Matrix) -> Result<Box<dyn FittedDetector>> {
        if train.rows() < self.min_train_rows() {
            return Err(Error::InsufficientTrainData {
                needed: self.min_train_rows(),
                got: train.rows(),
            });
        }
        let coefficients = (0..train.cols())
            .map(|c| fit_ar(&train.column(c), self.order).map(DVector::from_vec))
            .collect::<Result<_>>()?;
        Ok(Box::new(FittedAr {
            order: self.order,
            coefficients,
        }))
    }
}

impl FittedDetector for FittedAr {
    /// Euclidean norm over channels of the one-step residual; the first
    /// `order` points have no full history and score 0.
    fn score(&self, test: &Matrix, _overlap: Overlap) -> Result<ScoreSeries> {
        if test.cols() != self.coefficients.len() {
            return Err(Error::DimensionMismatch {
                expected: self.coefficients.len(),
                got: test.cols(),
            });
        }
        let mut sq = vec![0.0; test.rows()];
        for (c, beta) in self.coefficients.iter().enumerate() {
            let x = test.column(c);
            for t in self.order..x.len() {
                let r = x[t] - predict(beta, &x, t);
                sq[t] += r * r;
            }
        }
        ScoreSeries::new(sq.into_iter().map(f64::sqrt).collect(), 0)
    }
}
