//! PCA reconstruction error on standardized features.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{VectorModel, VectorScorer};
use crate::error::{Error, Result};
use crate::types::Matrix;

pub struct PcaModel {
    /// Fraction of variance the kept components must explain.
    pub variance: f64,
    /// Fixed component count; overrides `variance`.
    pub components: Option<usize>,
}

pub struct FittedPca {
    mean: DVector<f64>,
    scale: DVector<f64>,
    /// Kept principal axes as columns.
    basis: DMatrix<f64>,
}

impl PcaModel {
    pub fn fit_rows(&self, rows: &Matrix) -> Result<FittedPca> {
        let n = rows.rows();
        let d = rows.cols();
        if n < 2 {
            return Err(Error::InsufficientTrainData { needed: 2, got: n });
        }
        let x = DMatrix::from_row_slice(n, d, rows.as_slice());
        let mean = DVector::from_fn(d, |j, _| x.column(j).mean());
        let scale = DVector::from_fn(d, |j, _| {
            let m = mean[j];
            (x.column(j).iter().map(|v| (v - m).powi(2)).sum::<f64>() / n as f64).sqrt()
        });
        if let Some(j) = (0..d).find(|&j| scale[j] <= 1e-12 * (1.0 + mean[j].abs())) {
            return Err(Error::DegenerateData(format!("feature {j} has zero variance")));
        }
        let z = DMatrix::from_fn(n, d, |i, j| (x[(i, j)] - mean[j]) / scale[j]);
        let cov = z.transpose() * &z / (n as f64 - 1.0);
        let eig = SymmetricEigen::new(cov);
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
        let kept = match self.components {
            Some(c) => c.min(d),
            None => {
                let total: f64 = eig.eigenvalues.iter().map(|v| v.max(0.0)).sum();
                let mut acc = 0.0;
                let mut kept = d;
                for (i, &j) in order.iter().enumerate() {
                    acc += eig.eigenvalues[j].max(0.0);
                    if acc >= self.variance * total - 1e-12 {
                        kept = i + 1;
                        break;
                    }
                }
                kept
            }
        };
        let basis = DMatrix::from_fn(d, kept, |r, c| {
            let v = eig.eigenvectors.column(order[c]);
            // Fix the sign so the largest-magnitude entry is positive.
            let pivot = v.iter().fold(0.0f64, |p, &e| if e.abs() > p.abs() { e } else { p });
            v[r] * pivot.signum()
        });
        Ok(FittedPca { mean, scale, basis })
    }
}

impl VectorModel for PcaModel {
    fn min_rows(&self) -> usize {
        2
    }

    fn fit(&self, rows: &Matrix) -> Result<Box<dyn VectorScorer>> {
        Ok(Box::new(self.fit_rows(rows)?))
    }
}

impl FittedPca {
    pub fn components(&self) -> usize {
        self.basis.ncols()
    }

    /// Squared reconstruction error of the standardized vector.
    pub fn score(&self, x: &[f64]) -> f64 {
        let z = DVector::from_fn(x.len(), |j, _| (x[j] - self.mean[j]) / self.scale[j]);
        let proj = &self.basis * (self.basis.transpose() * &z);
        (z - proj).norm_squared()
    }
}

impl VectorScorer for FittedPca {
    fn score_rows(&self, rows: &Matrix) -> Vec<f64> {
        (0..rows.rows()).map(|i| self.score(rows.row(i))).collect()
    }
}
