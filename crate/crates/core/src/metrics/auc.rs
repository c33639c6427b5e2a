//! Threshold-free metrics: AUC-ROC, AUC-PR and their range (buffered-label)
//! generalizations.

use serde::{Deserialize, Serialize};

use super::point::check_len;
use crate::error::{Error, Result};
use crate::types::extract_events;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Curve {
    Roc,
    Pr,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VusParams {
    /// Largest buffer length, in points.
    pub l_max: f64,
    /// Number of buffer lengths sampled uniformly on `[0, l_max]`.
    pub grid: usize,
}

impl VusParams {
    pub fn new(l_max: f64) -> Self {
        Self { l_max, grid: 21 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.l_max >= 0.0 && self.l_max.is_finite()) || self.grid < 2 {
            return Err(Error::InvalidArgument(format!(
                "vus needs l_max >= 0 and grid >= 2, got {} and {}",
                self.l_max, self.grid
            )));
        }
        Ok(())
    }

    pub fn lengths(&self) -> Vec<f64> {
        let n = self.grid - 1;
        (0..=n).map(|i| self.l_max * i as f64 / n as f64).collect()
    }
}

/// Area under the ROC or PR curve of `scores` against real-valued labels in
/// `[0, 1]`. At each distinct cutoff, true-positive mass is the label sum
/// over flagged points and false-positive mass is the flagged count minus
/// it; P is the total label mass and N = L - P.
pub fn curve_area(scores: &[f64], labels: &[f64], curve: Curve) -> Result<f64> {
    check_len(scores.len(), labels.len())?;
    let p: f64 = labels.iter().sum();
    let n = labels.len() as f64 - p;
    if p <= 0.0 || n <= 0.0 {
        return Err(Error::SingleClassTruth);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let (mut tp, mut flagged) = (0.0, 0usize);
    let mut area = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            tp += labels[order[i]];
            flagged += 1;
            i += 1;
        }
        let fp = flagged as f64 - tp;
        let point = match curve {
            Curve::Roc => (fp / n, tp / p),
            Curve::Pr => (tp / p, tp / flagged as f64),
        };
        let (x0, y0) = match (prev, curve) {
            (Some(q), _) => q,
            (None, Curve::Roc) => (0.0, 0.0),
            (None, Curve::Pr) => (0.0, point.1),
        };
        area += (point.0 - x0) * (point.1 + y0) / 2.0;
        prev = Some(point);
    }
    Ok(area.clamp(0.0, 1.0))
}

fn binary_labels(truth: &[u8]) -> Vec<f64> {
    truth.iter().map(|&t| if t != 0 { 1.0 } else { 0.0 }).collect()
}

pub fn auc_roc(scores: &[f64], truth: &[u8]) -> Result<f64> {
    curve_area(scores, &binary_labels(truth), Curve::Roc)
}

pub fn auc_pr(scores: &[f64], truth: &[u8]) -> Result<f64> {
    curve_area(scores, &binary_labels(truth), Curve::Pr)
}

/// Labels widened by a buffer of `l` points on both sides of every event:
/// 1 inside, `(1 - d/l)^(1/2)` at distance `d < l`, 0 beyond; overlapping
/// buffers take the max.
pub fn smooth_labels(truth: &[u8], l: f64) -> Vec<f64> {
    let mut out = binary_labels(truth);
    if l <= 0.0 {
        return out;
    }
    let reach = l.ceil() as usize;
    for e in extract_events(truth) {
        let left = e.start.saturating_sub(reach)..e.start;
        let right = e.end..(e.end + reach).min(truth.len());
        for i in left.chain(right) {
            let d = if i < e.start { e.start - i } else { i + 1 - e.end } as f64;
            if d < l {
                out[i] = out[i].max((1.0 - d / l).sqrt());
            }
        }
    }
    out
}

/// Range AUC with buffer length `l`; equals the plain AUC at `l = 0`.
pub fn r_auc(scores: &[f64], truth: &[u8], l: f64, curve: Curve) -> Result<f64> {
    curve_area(scores, &smooth_labels(truth, l), curve)
}

/// Trapezoidal average of the range AUC over the buffer grid.
pub fn vus(scores: &[f64], truth: &[u8], params: &VusParams, curve: Curve) -> Result<f64> {
    params.validate()?;
    if params.l_max == 0.0 {
        return r_auc(scores, truth, 0.0, curve);
    }
    let values = params
        .lengths()
        .into_iter()
        .map(|l| r_auc(scores, truth, l, curve))
        .collect::<Result<Vec<f64>>>()?;
    let n = values.len() - 1;
    let inner: f64 = values[1..n].iter().sum();
    Ok(((values[0] + values[n]) / 2.0 + inner) / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Mann-Whitney pair counting.
    fn roc_oracle(scores: &[f64], truth: &[u8]) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for (i, &ti) in truth.iter().enumerate() {
            for (j, &tj) in truth.iter().enumerate() {
                if ti == 1 && tj == 0 {
                    den += 1.0;
                    num += if scores[i] > scores[j] {
                        1.0
                    } else if scores[i] == scores[j] {
                        0.5
                    } else {
                        0.0
                    };
                }
            }
        }
        num / den
    }

    #[test]
    fn roc_fixtures() {
        assert_eq!(auc_roc(&[0.9, 0.1], &[1, 0]).unwrap(), 1.0);
        assert_eq!(auc_roc(&[0.3; 6], &[1, 0, 0, 1, 0, 0]).unwrap(), 0.5);
        let s = [0.8, 0.6, 0.4, 0.2];
        let t = [1, 0, 1, 0];
        assert_eq!(auc_roc(&s, &t).unwrap(), 0.75);
        assert_eq!(roc_oracle(&s, &t), 0.75);
        assert!(matches!(auc_roc(&[1.0, 2.0], &[1, 1]), Err(Error::SingleClassTruth)));
    }

    #[test]
    fn roc_matches_pair_counting_with_ties() {
        let s = [3.0, 1.0, 3.0, 2.0, 2.0, 0.0, 3.0, 1.0];
        let t = [1, 0, 0, 1, 0, 0, 1, 1];
        assert!((auc_roc(&s, &t).unwrap() - roc_oracle(&s, &t)).abs() < 1e-12);
    }

    #[test]
    fn pr_fixture() {
        // Cutoffs give (recall, precision) = (1/2, 1), (1/2, 1/2), (1, 2/3),
        // (1, 1/2), anchored at (0, 1).
        let a = auc_pr(&[0.8, 0.6, 0.4, 0.2], &[1, 0, 1, 0]).unwrap();
        let want = 0.5 * 1.0 + 0.5 * (0.5 + 2.0 / 3.0) / 2.0;
        assert!((a - want).abs() < 1e-12);
        assert_eq!(auc_pr(&[0.9, 0.1], &[1, 0]).unwrap(), 1.0);
    }

    #[test]
    fn smoothing() {
        let t = [0, 0, 0, 0, 0, 1, 0, 0, 0];
        assert_eq!(smooth_labels(&t, 0.0), binary_labels(&t));
        let s = smooth_labels(&t, 2.0);
        assert_eq!(s[3], 0.0);
        assert!((s[4] - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(s[5], 1.0);
        assert!((s[6] - 0.5f64.sqrt()).abs() < 1e-15);
        let s = smooth_labels(&[1, 0, 0, 1], 3.0);
        assert!(s.iter().all(|v| (0.0..=1.0).contains(v)));
        assert!((s[1] - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn range_auc_reduces_to_auc() {
        let s = [0.5, 0.1, 0.9, 0.3, 0.3, 0.7];
        let t = [0, 0, 1, 1, 0, 0];
        assert_eq!(r_auc(&s, &t, 0.0, Curve::Roc).unwrap(), auc_roc(&s, &t).unwrap());
        assert_eq!(r_auc(&s, &t, 0.0, Curve::Pr).unwrap(), auc_pr(&s, &t).unwrap());
        let p = VusParams { l_max: 0.0, grid: 21 };
        assert_eq!(vus(&s, &t, &p, Curve::Roc).unwrap(), auc_roc(&s, &t).unwrap());
    }

    #[test]
    fn vus_close_to_dense_integration() {
        let s = [0.1, 0.2, 0.15, 0.6, 0.9, 0.8, 0.7, 0.3, 0.1, 0.05, 0.2, 0.1];
        let t = [0, 0, 0, 0, 1, 1, 1, 0, 0, 0, 0, 0];
        for curve in [Curve::Roc, Curve::Pr] {
            let v = vus(&s, &t, &VusParams::new(4.0), curve).unwrap();
            let dense = VusParams { l_max: 4.0, grid: 201 };
            let vals: Vec<f64> = dense.lengths().iter().map(|&l| r_auc(&s, &t, l, curve).unwrap()).collect();
            let h = 4.0 / 200.0;
            let integral: f64 = vals.windows(2).map(|w| (w[0] + w[1]) / 2.0 * h).sum();
            assert!((v - integral / 4.0).abs() < 0.02, "{curve:?}");
        }
    }
}
