//! Haar wavelet multilevel anomaly detection.

use super::{max_over_channels, Detector, DetectorKind, FittedDetector};
use crate::error::Result;
use crate::numeric::{mean, std_dev};
use crate::types::{Matrix, Overlap, ScoreSeries};

#[derive(Debug, Clone, Copy)]
pub struct DwtMlead {
    /// Decomposition stops before a level with fewer detail coefficients.
    pub min_coefficients: usize,
}

/// Detail coefficients of each Haar level, finest first. The input is padded
/// with its last value to a power-of-two length.
pub fn haar_details(x: &[f64], min_coefficients: usize) -> Vec<Vec<f64>> {
    let n = x.len().next_power_of_two();
    let mut approx = x.to_vec();
    approx.resize(n, *x.last().unwrap_or(&0.0));
    let mut levels = Vec::new();
    while approx.len() / 2 >= min_coefficients.max(1) {
        let (a, d): (Vec<f64>, Vec<f64>) = approx
            .chunks_exact(2)
            .map(|p| {
                (
                    (p[0] + p[1]) / std::f64::consts::SQRT_2,
                    (p[0] - p[1]) / std::f64::consts::SQRT_2,
                )
            })
            .unzip();
        levels.push(d);
        approx = a;
    }
    levels
}

/// Per-point score: the largest absolute z-score among the detail
/// coefficients (one per level) whose support contains the point.
pub fn dwt_scores(x: &[f64], min_coefficients: usize) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    for (level, d) in haar_details(x, min_coefficients).iter().enumerate() {
        let (m, s) = (mean(d), std_dev(d));
        if s <= 1e-12 * (1.0 + m.abs()) {
            continue;
        }
        let span = 2usize << level;
        for (t, o) in out.iter_mut().enumerate() {
            *o = f64::max(*o, ((d[t / span] - m) / s).abs());
        }
    }
    out
}

impl Detector for DwtMlead {
    fn kind(&self) -> DetectorKind {
        DetectorKind::DwtMlead
    }

    fn window(&self) -> Option<usize> {
        None
    }

    fn min_train_rows(&self) -> usize {
        0
    }

    fn fit(&self, _train: &Matrix) -> Result<Box<dyn FittedDetector>> {
        Ok(Box::new(*self))
    }
}

impl FittedDetector for DwtMlead {
    fn score(&self, test: &Matrix, _overlap: Overlap) -> Result<ScoreSeries> {
        let scores = max_over_channels(test, |x| Ok(dwt_scores(x, self.min_coefficients)))?;
        ScoreSeries::new(scores, 0)
    }
}
