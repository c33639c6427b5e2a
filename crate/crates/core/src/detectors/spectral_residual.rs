//! Spectral residual saliency.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::{max_over_channels, Detector, DetectorKind, FittedDetector};
use crate::error::Result;
use crate::numeric::mean;
use crate::types::{Matrix, Overlap, ScoreSeries};

/// Spectral bins at or below this magnitude carry no signal and are dropped.
const MAGNITUDE_EPS: f64 = 1e-8;

#[derive(Debug, Clone, Copy)]
pub struct SpectralResidual {
    /// Width of the moving average over the log-amplitude spectrum.
    pub average_window: usize,
}

/// Saliency map of one channel: the inverse transform of the spectrum with
/// its log amplitude replaced by the residual against a local average.
pub fn saliency(x: &[f64], q: usize) -> Vec<f64> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let m = mean(x);
    let mut buf: Vec<Complex<f64>> = x.iter().map(|v| Complex::new(v - m, 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);

    let scale = n as f64;
    let log_amp: Vec<Option<f64>> = buf
        .iter()
        .map(|c| {
            let a = c.norm();
            (a > MAGNITUDE_EPS * scale).then(|| a.ln())
        })
        .collect();
    let half = q / 2;
    for (k, c) in buf.iter_mut().enumerate() {
        let Some(l) = log_amp[k] else {
            *c = Complex::new(0.0, 0.0);
            continue;
        };
        let lo = k.saturating_sub(half);
        let hi = (k + q - half).min(n);
        let (sum, cnt) = log_amp[lo..hi]
            .iter()
            .flatten()
            .fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
        let residual = l - sum / cnt as f64;
        *c = Complex::from_polar(residual.exp(), c.arg());
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    buf.iter().map(|c| c.norm() / scale).collect()
}

impl Detector for SpectralResidual {
    fn kind(&self) -> DetectorKind {
        DetectorKind::SpectralResidual
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

impl FittedDetector for SpectralResidual {
    fn score(&self, test: &Matrix, _overlap: Overlap) -> Result<ScoreSeries> {
        let scores = max_over_channels(test, |x| Ok(saliency(x, self.average_window)))?;
        ScoreSeries::new(scores, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::total_cmp;

    #[test]
    fn constant_series_has_no_saliency() {
        for n in [1, 7, 64, 100] {
            assert!(saliency(&vec![3.25; n], 3).iter().all(|&s| s <= 1e-6));
        }
    }

    #[test]
    fn spike_is_most_salient() {
        let mut x: Vec<f64> = (0..256).map(|i| (i as f64 * 2.0 * std::f64::consts::PI / 32.0).sin()).collect();
        x[150] += 5.0;
        let s = saliency(&x, 3);
        let argmax = (0..s.len()).max_by(|&a, &b| total_cmp(&s[a], &s[b])).unwrap();
        assert_eq!(argmax, 150);
    }
}
