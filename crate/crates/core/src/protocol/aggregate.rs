use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::types::{DatasetManifest, RunRecord};

/// Metric means of one method over one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub dataset: String,
    pub method: String,
    /// Successful runs averaged.
    pub series: usize,
    pub failures: usize,
    pub means: BTreeMap<String, f64>,
}

/// How records are grouped into methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodKey {
    DetectorId,
    Kind,
}

impl MethodKey {
    fn of(self, r: &RunRecord) -> &str {
        match self {
            MethodKey::DetectorId => &r.detector_id,
            MethodKey::Kind => &r.kind,
        }
    }
}

/// Unweighted per-(dataset, method) means over successful runs. The
/// manifest assigns series to datasets; series it does not list keep the
/// dataset stored in their record.
pub fn aggregate(records: &[RunRecord], manifest: &DatasetManifest, key: MethodKey) -> Vec<DatasetSummary> {
    let mut groups: BTreeMap<(String, String), (usize, usize, BTreeMap<String, f64>)> = BTreeMap::new();
    for r in records {
        let dataset = manifest
            .get(&r.series_name)
            .map_or(r.dataset.as_str(), |e| e.dataset_name());
        let g = groups
            .entry((dataset.to_string(), key.of(r).to_string()))
            .or_default();
        match &r.report {
            Some(report) if r.status.is_ok() => {
                g.0 += 1;
                for (name, v) in &report.entries {
                    *g.2.entry(name.clone()).or_insert(0.0) += v;
                }
            }
            _ => g.1 += 1,
        }
    }
    groups
        .into_iter()
        .map(|((dataset, method), (n, failures, sums))| DatasetSummary {
            dataset,
            method,
            series: n,
            failures,
            means: sums.into_iter().map(|(k, s)| (k, s / n as f64)).collect(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{MetricReport, Overlap, RunStatus, Split, Strategy};

    fn record(series: &str, dataset: &str, f1: Option<f64>) -> RunRecord {
        RunRecord {
            run_id: format!("{series}:zscore/a"),
            detector_id: "zscore/a".into(),
            kind: "zscore".into(),
            hyperparams: BTreeMap::new(),
            seed: 0,
            strategy: Strategy::Full,
            few_fraction: None,
            window: 16,
            overlap: Overlap::NonOverlapping,
            point_adjust: false,
            fit_on_test: false,
            series_name: series.into(),
            dataset: dataset.into(),
            split: Split::new(1, 2, 3).unwrap(),
            train_seconds: 0.0,
            infer_seconds: 0.0,
            peak_memory_bytes: None,
            status: match f1 {
                Some(_) => RunStatus::Ok,
                None => RunStatus::Failed { reason: "x".into() },
            },
            report: f1.map(|v| MetricReport {
                entries: [("F1".to_string(), v)].into(),
                ..Default::default()
            }),
            per_threshold: vec![],
            version: "0".into(),
        }
    }

    #[test]
    fn means_and_failures() {
        let m = DatasetManifest::default();
        let recs = [record("a", "d", Some(0.4)), record("b", "d", Some(0.6)), record("c", "e", Some(0.3))];
        let s = aggregate(&recs, &m, MethodKey::Kind);
        assert_eq!(s.len(), 2);
        assert!((s[0].means["F1"] - 0.5).abs() < 1e-15);
        assert_eq!(s[1].means["F1"], 0.3);

        let recs = [record("a", "d", Some(0.4)), record("b", "d", None), record("c", "d", Some(0.8))];
        let s = aggregate(&recs, &m, MethodKey::DetectorId);
        assert_eq!((s[0].series, s[0].failures), (2, 1));
        assert!((s[0].means["F1"] - 0.6).abs() < 1e-15);
    }
}
