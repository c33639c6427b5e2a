use crate::error::{Error, Result};
use crate::types::{extract_events, PredictionSeries, ScoreSeries};

/// Point-wise confusion-matrix metrics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointMetrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

pub(crate) fn check_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::LengthMismatch { left: a, right: b });
    }
    Ok(())
}

/// Number of points flagged by top-`t`% thresholding of `len` scores (at
/// least one).
pub fn flagged_count(len: usize, t: f64) -> usize {
    ((t / 100.0 * len as f64 - 1e-9).ceil() as usize).clamp(1, len.max(1))
}

/// Flag the top `t` percent of scores: the cutoff is the k-th largest score
/// with `k = ceil(t% * L)`, and every score at or above it is flagged, so
/// ties can flag more than k points.
pub fn threshold(scores: &ScoreSeries, t: f64) -> PredictionSeries {
    let s = scores.scores();
    if s.is_empty() {
        return PredictionSeries(Vec::new());
    }
    let k = flagged_count(s.len(), t);
    let mut sorted = s.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let cutoff = sorted[k - 1];
    PredictionSeries(s.iter().map(|&v| u8::from(v >= cutoff)).collect())
}

pub fn point_metrics(preds: &[u8], truth: &[u8]) -> Result<PointMetrics> {
    check_len(preds.len(), truth.len())?;
    let (mut tp, mut fp, mut fn_, mut tn) = (0usize, 0usize, 0usize, 0usize);
    for (&p, &t) in preds.iter().zip(truth) {
        match (p != 0, t != 0) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => tn += 1,
        }
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    Ok(PointMetrics {
        accuracy: ratio(tp + tn, preds.len()),
        precision,
        recall,
        f1: harmonic(precision, recall),
    })
}

/// Harmonic mean, 0 when both are 0.
pub fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Expand predictions to every ground-truth event they touch.
pub fn point_adjust(preds: &[u8], truth: &[u8]) -> Result<PredictionSeries> {
    check_len(preds.len(), truth.len())?;
    let mut out = preds.to_vec();
    for e in extract_events(truth) {
        if preds[e.start..e.end].iter().any(|&p| p != 0) {
            out[e.start..e.end].iter_mut().for_each(|p| *p = 1);
        }
    }
    Ok(PredictionSeries(out))
}
