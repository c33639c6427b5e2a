//! Affiliation precision and recall.
//!
//! Point `i` is the interval `[i, i + 1)` on the axis `[0, L)`. Each truth
//! event owns the zone between the midpoints to its neighbours. Inside a
//! zone, predictions are compared with the event through directed
//! distances, and each distance becomes the probability that a uniformly
//! random point of the zone would do at least as badly.

use super::point::{check_len, harmonic};
use crate::error::{Error, Result};
use crate::types::extract_events;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffiliationMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

type Interval = (f64, f64);

/// Integral of `f` over `[lo, hi]`, where `f` is linear between consecutive
/// breakpoints (midpoint rule, exact on each linear piece).
fn integrate(lo: f64, hi: f64, breaks: &mut Vec<f64>, f: impl Fn(f64) -> f64) -> f64 {
    breaks.retain(|&b| b > lo && b < hi);
    breaks.push(lo);
    breaks.push(hi);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    breaks
        .windows(2)
        .map(|w| f(0.5 * (w[0] + w[1])) * (w[1] - w[0]))
        .sum()
}

struct Zone {
    a: f64,
    b: f64,
    js: f64,
    je: f64,
}

impl Zone {
    fn len(&self) -> f64 {
        self.b - self.a
    }

    /// P(dist(X, J) >= d) for X uniform on the zone.
    fn precision_survival(&self, d: f64) -> f64 {
        if d <= 0.0 {
            return 1.0;
        }
        ((self.js - d - self.a).max(0.0) + (self.b - self.je - d).max(0.0)) / self.len()
    }

    /// P(|X - t| >= d) for X uniform on the zone.
    fn recall_survival(&self, t: f64, d: f64) -> f64 {
        ((t - d - self.a).max(0.0) + (self.b - t - d).max(0.0)) / self.len()
    }

    fn dist_to_event(&self, y: f64) -> f64 {
        (self.js - y).max(y - self.je).max(0.0)
    }

    /// Mean precision probability over the predictions, or `None` if the
    /// zone holds none.
    fn precision(&self, preds: &[Interval]) -> Option<f64> {
        let mass: f64 = preds.iter().map(|(l, h)| h - l).sum();
        if mass <= 0.0 {
            return None;
        }
        let integral: f64 = preds
            .iter()
            .map(|&(l, h)| {
                let mut breaks = vec![
                    self.js,
                    self.je,
                    self.js + self.je - self.b,
                    self.js + self.je - self.a,
                ];
                integrate(l, h, &mut breaks, |y| self.precision_survival(self.dist_to_event(y)))
            })
            .sum();
        Some(integral / mass)
    }

    /// Mean recall probability over the event; 0 without predictions.
    fn recall(&self, preds: &[Interval]) -> f64 {
        if preds.is_empty() {
            return 0.0;
        }
        let dist = |t: f64| {
            preds
                .iter()
                .map(|&(l, h)| (l - t).max(t - h).max(0.0))
                .fold(f64::INFINITY, f64::min)
        };
        // Breakpoints where dist(t) changes slope.
        let mut breaks: Vec<f64> = Vec::new();
        for (i, &(l, h)) in preds.iter().enumerate() {
            breaks.push(l);
            breaks.push(h);
            if let Some(&(nl, _)) = preds.get(i + 1) {
                breaks.push(0.5 * (h + nl));
            }
        }
        breaks.retain(|&b| b > self.js && b < self.je);
        breaks.extend([self.js, self.je]);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        // On each linear piece, add the roots of t - d(t) = a and
        // t + d(t) = b, where the survival changes slope.
        let mut extra = Vec::new();
        for w in breaks.windows(2) {
            let (l, h) = (w[0], w[1]);
            let (dl, dh) = (dist(l), dist(h));
            let slope = (dh - dl) / (h - l);
            for (target, sign) in [(self.a, -1.0), (self.b, 1.0)] {
                // g(t) = t + sign * d(t) - target, linear on [l, h].
                let gl = l + sign * dl - target;
                let gs = 1.0 + sign * slope;
                if gs != 0.0 {
                    let root = l - gl / gs;
                    if root > l && root < h {
                        extra.push(root);
                    }
                }
            }
        }
        breaks.extend(extra);
        integrate(self.js, self.je, &mut breaks, |t| self.recall_survival(t, dist(t))) / (self.je - self.js)
    }
}

/// Affiliation precision, recall and F1. Precision averages over zones that
/// contain predictions (0 if none do); recall averages over all zones.
pub fn affiliation(preds: &[u8], truth: &[u8]) -> Result<AffiliationMetrics> {
    check_len(preds.len(), truth.len())?;
    let events = extract_events(truth);
    if events.is_empty() {
        return Err(Error::NoTruthEvents);
    }
    let pred_events = extract_events(preds);
    let len = truth.len() as f64;
    let mut precisions = Vec::new();
    let mut recall_sum = 0.0;
    for (k, e) in events.iter().enumerate() {
        let a = if k == 0 {
            0.0
        } else {
            0.5 * (events[k - 1].end + e.start) as f64
        };
        let b = match events.get(k + 1) {
            Some(n) => 0.5 * (e.end + n.start) as f64,
            None => len,
        };
        let zone = Zone {
            a,
            b,
            js: e.start as f64,
            je: e.end as f64,
        };
        let clipped: Vec<Interval> = pred_events
            .iter()
            .map(|p| ((p.start as f64).max(a), (p.end as f64).min(b)))
            .filter(|(l, h)| h > l)
            .collect();
        if let Some(p) = zone.precision(&clipped) {
            precisions.push(p);
        }
        recall_sum += zone.recall(&clipped);
    }
    let precision = if precisions.is_empty() {
        0.0
    } else {
        precisions.iter().sum::<f64>() / precisions.len() as f64
    };
    let recall = recall_sum / events.len() as f64;
    Ok(AffiliationMetrics {
        precision,
        recall,
        f1: harmonic(precision, recall),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Midpoint quadrature on a 1/64 grid, with distances found by scanning
    /// the same grid. Every kink of the integrands lies on a multiple of 1/4,
    /// so the result is exact up to rounding.
    fn oracle(preds: &[u8], truth: &[u8]) -> (f64, f64) {
        const STEPS: usize = 64;
        let l = truth.len();
        let h = 1.0 / STEPS as f64;
        let grid: Vec<f64> = (0..l * STEPS).map(|i| (i as f64 + 0.5) * h).collect();
        let at = |v: &[u8], x: f64| v[(x as usize).min(l - 1)] != 0;
        let ev = extract_events(truth);
        let (mut ps, mut rs) = (Vec::new(), Vec::new());
        for (k, e) in ev.iter().enumerate() {
            let a = if k == 0 { 0.0 } else { (ev[k - 1].end + e.start) as f64 / 2.0 };
            let b = ev.get(k + 1).map_or(l as f64, |n| (e.end + n.start) as f64 / 2.0);
            let zone: Vec<f64> = grid.iter().copied().filter(|&x| x >= a && x < b).collect();
            let (js, je) = (e.start as f64, e.end as f64);
            let dj = |x: f64| (js - x).max(x - je).max(0.0);
            let zone_preds: Vec<f64> = zone.iter().copied().filter(|&x| at(preds, x)).collect();
            if !zone_preds.is_empty() {
                let mut sum = 0.0;
                for &y in &zone_preds {
                    let d = dj(y);
                    let surv = if d <= 0.0 {
                        1.0
                    } else {
                        ((js - d - a).max(0.0) + (b - je - d).max(0.0)) / (b - a)
                    };
                    sum += surv;
                }
                ps.push(sum / zone_preds.len() as f64);
            }
            if zone_preds.is_empty() {
                rs.push(0.0);
                continue;
            }
            // Distance from t to the union of predicted unit cells (edges
            // included), on the cell-edge geometry.
            let cells: Vec<(f64, f64)> = (0..l)
                .filter(|&i| preds[i] != 0)
                .map(|i| ((i as f64).max(a), ((i + 1) as f64).min(b)))
                .filter(|(lo, hi)| hi > lo)
                .collect();
            let mut sum = 0.0;
            let mut n = 0;
            for &t in zone.iter().filter(|&&x| x >= js && x < je) {
                let d = cells.iter().map(|&(lo, hi)| (lo - t).max(t - hi).max(0.0)).fold(f64::INFINITY, f64::min);
                sum += ((t - d - a).max(0.0) + (b - t - d).max(0.0)) / (b - a);
                n += 1;
            }
            rs.push(sum / n as f64);
        }
        let p = if ps.is_empty() { 0.0 } else { ps.iter().sum::<f64>() / ps.len() as f64 };
        (p, rs.iter().sum::<f64>() / rs.len() as f64)
    }

    #[test]
    fn perfect_and_empty() {
        let t = [0, 1, 1, 0, 0, 0, 1, 0];
        let m = affiliation(&t, &t).unwrap();
        assert_eq!((m.precision, m.recall, m.f1), (1.0, 1.0, 1.0));
        let m = affiliation(&[0; 8], &t).unwrap();
        assert_eq!((m.precision, m.recall), (0.0, 0.0));
        assert!(matches!(affiliation(&[0; 4], &[0; 4]), Err(Error::NoTruthEvents)));
    }

    #[test]
    fn single_zone_fixture() {
        let mut truth = [0u8; 20];
        truth[8..12].iter_mut().for_each(|v| *v = 1);
        let mut preds = [0u8; 20];
        preds[9] = 1;
        let m = affiliation(&preds, &truth).unwrap();
        // The prediction lies in the event, so precision is 1. Recall: over
        // t in [8, 12), the distance to [9, 10) is 1 - (t - 8) on [8, 9),
        // 0 on [9, 10) and t - 10 on [10, 12); each survival is
        // (20 - 2 d) / 20, giving (0.95 + 1 + 0.9 * 2) / 4.
        assert_eq!(m.precision, 1.0);
        assert!((m.recall - 0.9375).abs() < 1e-12, "{}", m.recall);
        let (op, or) = oracle(&preds, &truth);
        assert!((m.precision - op).abs() < 1e-9 && (m.recall - or).abs() < 1e-9);
    }

    #[test]
    fn matches_oracle_on_mixed_cases() {
        let cases: [(&[u8], &[u8]); 5] = [
            (&[1, 0, 0, 0, 0, 0, 0, 0, 0, 1], &[0, 0, 0, 1, 1, 0, 0, 0, 0, 0]),
            (&[0, 0, 1, 0, 0, 0, 0, 1, 1, 0], &[0, 1, 0, 0, 0, 0, 1, 0, 0, 0]),
            (&[1, 1, 1, 1, 1, 1, 1, 1], &[0, 0, 0, 1, 0, 0, 0, 0]),
            (&[0, 0, 0, 0, 0, 0, 0, 1], &[1, 0, 0, 0, 0, 0, 0, 0]),
            (&[0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1], &[1, 1, 0, 0, 0, 0, 0, 1, 0, 0, 1, 1]),
        ];
        for (p, t) in cases {
            let m = affiliation(p, t).unwrap();
            let (op, or) = oracle(p, t);
            assert!((m.precision - op).abs() < 1e-9, "{p:?} {t:?}: {} vs {op}", m.precision);
            assert!((m.recall - or).abs() < 1e-9, "{p:?} {t:?}: {} vs {or}", m.recall);
            assert!((0.0..=1.0).contains(&m.f1));
        }
    }
}
