//! Metric suite: thresholding, point-wise, range, affiliation and
//! threshold-free metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{MetricReport, ScoreSeries};

pub mod affiliation;
pub mod auc;
pub mod point;
pub mod range;

pub use affiliation::{affiliation, AffiliationMetrics};
pub use auc::{auc_pr, auc_roc, r_auc, smooth_labels, vus, Curve, VusParams};
pub use point::{point_adjust, point_metrics, threshold, PointMetrics};
pub use range::{range_pr, Cardinality, PositionalBias, RangeMetrics, RangeParams};

/// Label-based metrics, computed at every threshold.
pub const LABEL_METRICS: [&str; 10] = [
    "Acc", "P", "R", "F1", "R-P", "R-R", "R-F1", "Aff-P", "Aff-R", "Aff-F1",
];

/// Score-based metrics, computed once from the raw scores.
pub const SCORE_METRICS: [&str; 6] = [
    "AUC-ROC",
    "AUC-PR",
    "R-AUC-ROC",
    "R-AUC-PR",
    "VUS-ROC",
    "VUS-PR",
];

/// All metric names in report order.
pub fn metric_names() -> impl Iterator<Item = &'static str> {
    LABEL_METRICS.into_iter().chain(SCORE_METRICS)
}

/// Top-percentile thresholds swept by label-based metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPolicy {
    percentiles: Vec<f64>,
}

impl Default for ThresholdPolicy {
    fn default() -> Self {
        Self {
            percentiles: vec![0.1, 0.5, 1.0, 2.0, 3.0, 5.0, 10.0, 15.0, 20.0, 25.0],
        }
    }
}

impl ThresholdPolicy {
    pub fn new(percentiles: Vec<f64>) -> Result<Self> {
        if percentiles.is_empty() {
            return Err(Error::InvalidArgument("empty threshold list".into()));
        }
        if percentiles.iter().any(|&t| !(t > 0.0 && t < 100.0)) {
            return Err(Error::InvalidArgument("thresholds must lie in (0, 100)".into()));
        }
        if percentiles.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("thresholds must be strictly ascending".into()));
        }
        Ok(Self { percentiles })
    }

    pub fn percentiles(&self) -> &[f64] {
        &self.percentiles
    }
}

/// Options of [`evaluate_all`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub policy: ThresholdPolicy,
    pub range: RangeParams,
    pub vus: VusParams,
    /// Apply point adjustment before label-based metrics. Off in the
    /// protocol; used only to demonstrate score inflation.
    pub point_adjust: bool,
}

impl EvalConfig {
    pub fn new(buffer: f64) -> Self {
        Self {
            policy: ThresholdPolicy::default(),
            range: RangeParams::default(),
            vus: VusParams::new(buffer),
            point_adjust: false,
        }
    }
}

/// Summary plus the per-threshold table it was taken from.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub report: MetricReport,
    pub per_threshold: Vec<MetricReport>,
}

/// Label-based metrics of one prediction vector.
pub fn label_metrics(preds: &[u8], truth: &[u8], range: &RangeParams) -> Result<MetricReport> {
    let p = point_metrics(preds, truth)?;
    let r = range_pr(preds, truth, range)?;
    let a = affiliation(preds, truth)?;
    let values = [
        p.accuracy,
        p.precision,
        p.recall,
        p.f1,
        r.precision,
        r.recall,
        r.f1,
        a.precision,
        a.recall,
        a.f1,
    ];
    Ok(MetricReport {
        entries: LABEL_METRICS
            .iter()
            .zip(values)
            .map(|(n, v)| (n.to_string(), v))
            .collect(),
        ..Default::default()
    })
}

/// Score-based metrics of one score vector.
pub fn score_metrics(scores: &[f64], truth: &[u8], params: &VusParams) -> Result<MetricReport> {
    let values = [
        auc_roc(scores, truth)?,
        auc_pr(scores, truth)?,
        r_auc(scores, truth, params.l_max, Curve::Roc)?,
        r_auc(scores, truth, params.l_max, Curve::Pr)?,
        vus(scores, truth, params, Curve::Roc)?,
        vus(scores, truth, params, Curve::Pr)?,
    ];
    Ok(MetricReport {
        entries: SCORE_METRICS
            .iter()
            .zip(values)
            .map(|(n, v)| (n.to_string(), v))
            .collect(),
        ..Default::default()
    })
}

/// Full evaluation. Label-based metrics are computed at every threshold and
/// summarized by their best value (the lowest threshold wins ties); the
/// summary's `threshold_used` is the threshold of the best F1. Score-based
/// metrics always use the raw scores.
pub fn evaluate_all(scores: &ScoreSeries, truth: &[u8], config: &EvalConfig) -> Result<Evaluation> {
    point::check_len(scores.len(), truth.len())?;
    config.range.validate()?;
    let mut summary = score_metrics(scores.scores(), truth, &config.vus)?;
    let mut per_threshold = Vec::with_capacity(config.policy.percentiles().len());
    for &t in config.policy.percentiles() {
        let mut preds = threshold(scores, t).0;
        if config.point_adjust {
            preds = point_adjust(&preds, truth)?.0;
        }
        let mut report = label_metrics(&preds, truth, &config.range)?;
        report.threshold_used = Some(t);
        per_threshold.push(report);
    }
    for name in LABEL_METRICS {
        let (best_t, best_v) = per_threshold
            .iter()
            .map(|r| (r.threshold_used.unwrap(), r.entries[name]))
            .fold((f64::NAN, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
        summary.entries.insert(name.to_string(), best_v);
        summary.best_thresholds.insert(name.to_string(), best_t);
    }
    summary.threshold_used = summary.best_thresholds.get("F1").copied();
    Ok(Evaluation {
        report: summary,
        per_threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn truth() -> Vec<u8> {
        let mut t = vec![0u8; 200];
        t[50..60].iter_mut().for_each(|v| *v = 1);
        t[120..125].iter_mut().for_each(|v| *v = 1);
        t
    }

    #[test]
    fn report_has_the_sixteen_metrics() {
        let t = truth();
        let s: Vec<f64> = (0..200).map(|i| ((i * 31) % 17) as f64).collect();
        let e = evaluate_all(&ScoreSeries::new(s, 0).unwrap(), &t, &EvalConfig::new(16.0)).unwrap();
        let names: Vec<&str> = e.report.entries.keys().map(String::as_str).collect();
        let mut want: Vec<&str> = metric_names().collect();
        want.sort();
        assert_eq!(names, want);
        assert_eq!(e.per_threshold.len(), 10);
        assert!(e.report.entries.values().all(|v| (0.0..=1.0).contains(v)));
        for r in &e.per_threshold {
            assert!(e.report.entries["F1"] >= r.entries["F1"]);
        }
    }

    #[test]
    fn perfect_scorer() {
        let t = truth();
        let s: Vec<f64> = t.iter().map(|&v| v as f64).collect();
        let s = ScoreSeries::new(s, 0).unwrap();
        let e = evaluate_all(&s, &t, &EvalConfig::new(0.0)).unwrap();
        for name in metric_names() {
            assert_eq!(e.report.entries[name], 1.0, "{name}");
        }
        // With a buffer, unflagged buffer points carry positive label mass,
        // so a binary scorer can no longer reach 1 on the range AUCs.
        let e = evaluate_all(&s, &t, &EvalConfig::new(16.0)).unwrap();
        for name in metric_names().filter(|n| !n.starts_with("R-AUC") && !n.starts_with("VUS")) {
            assert_eq!(e.report.entries[name], 1.0, "{name}");
        }
        assert!(e.report.entries["VUS-ROC"] < 1.0);
        // The top score is tied across all 15 anomalous points, so the
        // smallest threshold already flags exactly the truth.
        assert_eq!(e.report.threshold_used, Some(0.1));
    }

    #[test]
    fn policy_validation() {
        assert!(ThresholdPolicy::new(vec![]).is_err());
        assert!(ThresholdPolicy::new(vec![5.0, 1.0]).is_err());
        assert!(ThresholdPolicy::new(vec![0.0]).is_err());
        assert!(ThresholdPolicy::new(vec![1.0, 50.0]).is_ok());
    }
}
