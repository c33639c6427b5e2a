use super::{max_over_channels, Detector, DetectorKind, FittedDetector};
use crate::error::{Error, Result};
use crate::numeric::{mean, sorted, std_dev};
use crate::types::{Matrix, Overlap, ScoreSeries};

const MAD_TO_SIGMA: f64 = 1.4826;

/// Per-channel z-score: `|x - center| / scale`, max over channels. The robust
/// variant uses the median and the scaled median absolute deviation. With
/// no training rows the statistics come from the scored segment itself.
#[derive(Debug, Clone, Copy)]
pub struct ZScore {
    pub robust: bool,
}

#[derive(Debug, Clone)]
pub struct FittedZScore {
    robust: bool,
    /// Per-channel (center, scale); `None` means test-only mode.
    stats: Option<Vec<(f64, f64)>>,
}

fn median(x: &[f64]) -> f64 {
    let s = sorted(x);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        (s[n / 2 - 1] + s[n / 2]) / 2.0
    }
}

fn channel_stats(x: &[f64], robust: bool) -> (f64, f64) {
    let (center, scale) = if robust {
        let m = median(x);
        let dev: Vec<f64> = x.iter().map(|v| (v - m).abs()).collect();
        (m, MAD_TO_SIGMA * median(&dev))
    } else {
        (mean(x), std_dev(x))
    };
    let scale = if scale > 1e-12 * (1.0 + center.abs()) {
        scale
    } else {
        1.0
    };
    (center, scale)
}

impl Detector for ZScore {
    fn kind(&self) -> DetectorKind {
        DetectorKind::Zscore
    }

    fn window(&self) -> Option<usize> {
        None
    }

    fn min_train_rows(&self) -> usize {
        0
    }

    fn fit(&self, train: &Matrix) -> Result<Box<dyn FittedDetector>> {
        let stats = (!train.is_empty()).then(|| {
            (0..train.cols())
                .map(|c| channel_stats(&train.column(c), self.robust))
                .collect()
        });
        Ok(Box::new(FittedZScore {
            robust: self.robust,
            stats,
        }))
    }
}

impl FittedDetector for FittedZScore {
    fn score(&self, test: &Matrix, _overlap: Overlap) -> Result<ScoreSeries> {
        if let Some(stats) = &self.stats {
            if stats.len() != test.cols() {
                return Err(Error::DimensionMismatch {
                    expected: stats.len(),
                    got: test.cols(),
                });
            }
        }
        let mut channel = 0;
        let scores = max_over_channels(test, |x| {
            let (center, scale) = match &self.stats {
                Some(s) => s[channel],
                None => channel_stats(x, self.robust),
            };
            channel += 1;
            Ok(x.iter().map(|v| (v - center).abs() / scale).collect())
        })?;
        ScoreSeries::new(scores, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classical_score() {
        let z = ZScore { robust: false };
        let fitted = z.fit(&Matrix::from_column(&[1.0, -1.0, 1.0, -1.0])).unwrap();
        let s = fitted.score(&Matrix::from_column(&[3.0]), Overlap::NonOverlapping).unwrap();
        assert_eq!(s.scores(), &[3.0]);
    }

    #[test]
    fn robust_score_ignores_outliers_in_train() {
        let z = ZScore { robust: true };
        let fitted = z
            .fit(&Matrix::from_column(&[0.0, 1.0, -1.0, 1.0, -1.0, 1000.0]))
            .unwrap();
        let s = fitted.score(&Matrix::from_column(&[0.5]), Overlap::NonOverlapping).unwrap();
        assert!(s.scores()[0] < 1.0);
    }

    #[test]
    fn power_of_two_scaling_is_exact() {
        let train: Vec<f64> = (0..50).map(|i| (i as f64 * 0.37).sin()).collect();
        let test: Vec<f64> = (0..20).map(|i| (i as f64 * 0.91).cos() * 2.0).collect();
        for robust in [false, true] {
            let z = ZScore { robust };
            let a = z.fit(&Matrix::from_column(&train)).unwrap()
                .score(&Matrix::from_column(&test), Overlap::NonOverlapping).unwrap();
            let scaled = |v: &[f64]| v.iter().map(|x| x * 4.0).collect::<Vec<_>>();
            let b = z.fit(&Matrix::from_column(&scaled(&train))).unwrap()
                .score(&Matrix::from_column(&scaled(&test)), Overlap::NonOverlapping).unwrap();
            assert_eq!(a, b);
        }
    }
}
