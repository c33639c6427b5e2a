//! Range-based precision and recall over anomaly intervals.

use serde::{Deserialize, Serialize};

use super::point::{check_len, harmonic};
use crate::error::{Error, Result};
use crate::types::{extract_events, AnomalyEvent};

/// Where inside an event overlap counts the most.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PositionalBias {
    #[default]
    Flat,
    Front,
    Back,
    Middle,
}

/// Penalty for an event overlapped by several fragments.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cardinality {
    One,
    #[default]
    Reciprocal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RangeParams {
    /// Weight of the existence reward in recall.
    pub alpha: f64,
    pub bias: PositionalBias,
    pub cardinality: Cardinality,
}

impl Default for RangeParams {
    fn default() -> Self {
        Self {
            alpha: 0.0,
            bias: PositionalBias::Flat,
            cardinality: Cardinality::Reciprocal,
        }
    }
}

impl RangeParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidArgument(format!("alpha {} outside [0, 1]", self.alpha)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Weight of 1-based position `i` in an event of length `n`.
fn delta(bias: PositionalBias, i: usize, n: usize) -> f64 {
    match bias {
        PositionalBias::Flat => 1.0,
        PositionalBias::Front => (n - i + 1) as f64,
        PositionalBias::Back => i as f64,
        PositionalBias::Middle => {
            if i <= n / 2 {
                i as f64
            } else {
                (n - i + 1) as f64
            }
        }
    }
}

/// Positional overlap reward of `event` against the given overlapping ranges.
fn omega(event: AnomalyEvent, others: &[AnomalyEvent], bias: PositionalBias) -> f64 {
    let n = event.len();
    let total: f64 = (1..=n).map(|i| delta(bias, i, n)).sum();
    let mut hit = 0.0;
    for o in others {
        let lo = event.start.max(o.start);
        let hi = event.end.min(o.end);
        for t in lo..hi {
            hit += delta(bias, t - event.start + 1, n);
        }
    }
    hit / total
}

fn overlapping(event: AnomalyEvent, others: &[AnomalyEvent]) -> Vec<AnomalyEvent> {
    others
        .iter()
        .copied()
        .filter(|o| o.start < event.end && event.start < o.end)
        .collect()
}

fn event_score(event: AnomalyEvent, others: &[AnomalyEvent], alpha: f64, p: &RangeParams) -> f64 {
    let hits = overlapping(event, others);
    let existence = if hits.is_empty() { 0.0 } else { 1.0 };
    let cardinality = match (p.cardinality, hits.len()) {
        (_, 0 | 1) | (Cardinality::One, _) => 1.0,
        (Cardinality::Reciprocal, k) => 1.0 / k as f64,
    };
    alpha * existence + (1.0 - alpha) * cardinality * omega(event, &hits, p.bias)
}

fn mean_score(events: &[AnomalyEvent], others: &[AnomalyEvent], alpha: f64, p: &RangeParams) -> f64 {
    if events.is_empty() {
        return 0.0;
    }
    events.iter().map(|&e| event_score(e, others, alpha, p)).sum::<f64>() / events.len() as f64
}

/// Recall averages over truth events; precision averages over predicted
/// events with the existence weight forced to 0. An empty side scores 0.
pub fn range_pr(preds: &[u8], truth: &[u8], params: &RangeParams) -> Result<RangeMetrics> {
    check_len(preds.len(), truth.len())?;
    params.validate()?;
    let real = extract_events(truth);
    let pred = extract_events(preds);
    let recall = mean_score(&real, &pred, params.alpha, params);
    let precision = mean_score(&pred, &real, 0.0, params);
    Ok(RangeMetrics {
        precision,
        recall,
        f1: harmonic(precision, recall),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn events(len: usize, spans: &[(usize, usize)]) -> Vec<u8> {
        let mut v = vec![0; len];
        for &(s, e) in spans {
            v[s..e].iter_mut().for_each(|x| *x = 1);
        }
        v
    }

    #[test]
    fn half_overlap() {
        let m = range_pr(&events(12, &[(5, 9)]), &events(12, &[(3, 7)]), &RangeParams::default()).unwrap();
        assert_eq!((m.precision, m.recall, m.f1), (0.5, 0.5, 0.5));
    }

    #[test]
    fn exact_match_and_empty() {
        let t = events(10, &[(1, 3), (6, 9)]);
        let m = range_pr(&t, &t, &RangeParams::default()).unwrap();
        assert_eq!((m.precision, m.recall, m.f1), (1.0, 1.0, 1.0));
        let m = range_pr(&[0; 10], &t, &RangeParams::default()).unwrap();
        assert_eq!((m.precision, m.recall, m.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn fragmentation_is_penalized_by_reciprocal_cardinality() {
        let truth = events(12, &[(2, 10)]);
        let preds = events(12, &[(2, 5), (6, 10)]);
        let one = RangeParams { cardinality: Cardinality::One, ..Default::default() };
        let r_one = range_pr(&preds, &truth, &one).unwrap().recall;
        let r_rec = range_pr(&preds, &truth, &RangeParams::default()).unwrap().recall;
        assert_eq!(r_one, 7.0 / 8.0);
        assert_eq!(r_rec, 7.0 / 16.0);
        assert!(r_rec < r_one);
    }

    #[test]
    fn existence_weight_and_bias() {
        let truth = events(10, &[(0, 4)]);
        let preds = events(10, &[(3, 4)]);
        let p = RangeParams { alpha: 0.5, ..Default::default() };
        assert_eq!(range_pr(&preds, &truth, &p).unwrap().recall, 0.5 + 0.5 * 0.25);
        // Back bias weights position 4 of 4 as 4 / (1 + 2 + 3 + 4).
        let p = RangeParams { bias: PositionalBias::Back, ..Default::default() };
        assert_eq!(range_pr(&preds, &truth, &p).unwrap().recall, 0.4);
        let p = RangeParams { bias: PositionalBias::Front, ..Default::default() };
        assert_eq!(range_pr(&preds, &truth, &p).unwrap().recall, 0.1);
        assert!(range_pr(&preds, &truth, &RangeParams { alpha: 1.5, ..Default::default() }).is_err());
    }
}
