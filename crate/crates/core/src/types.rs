//! Shared domain vocabulary: series, splits, scores, events, reports and run
//! records. Every type here is immutable once constructed.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major matrix of observations: one row per timestamp, one column
/// per channel (or per flattened window feature).
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if cols == 0 {
            return Err(Error::InvalidArgument("matrix needs at least one column".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::LengthMismatch {
                left: data.len(),
                right: rows * cols,
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Empty matrix with a fixed column count (used for zero-shot fits).
    pub fn empty(cols: usize) -> Self {
        Self {
            rows: 0,
            cols: cols.max(1),
            data: Vec::new(),
        }
    }

    pub fn from_column(values: &[f64]) -> Self {
        Self {
            rows: values.len(),
            cols: 1,
            data: values.to_vec(),
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(1, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Matrix::new(rows.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.data[r * self.cols + c]).collect()
    }

    /// Contiguous block of rows `[start, end)`.
    pub fn slice_rows(&self, start: usize, end: usize) -> Matrix {
        Matrix {
            rows: end - start,
            cols: self.cols,
            data: self.data[start * self.cols..end * self.cols].to_vec(),
        }
    }

    /// Flattened window of rows `[start, start + len)` as one feature vector.
    pub fn window(&self, start: usize, len: usize) -> &[f64] {
        &self.data[start * self.cols..(start + len) * self.cols]
    }
}

/// A labeled, finite, T×D real-valued series.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    name: String,
    domain: String,
    values: Matrix,
    labels: Vec<u8>,
}

impl TimeSeries {
    pub fn new(
        name: impl Into<String>,
        domain: impl Into<String>,
        values: Matrix,
        labels: Vec<u8>,
    ) -> Result<Self> {
        if values.rows() == 0 {
            return Err(Error::InvalidSeries("series must have at least one point".into()));
        }
        if labels.len() != values.rows() {
            return Err(Error::InvalidSeries(format!(
                "{} labels for {} points",
                labels.len(),
                values.rows()
            )));
        }
        if let Some(pos) = labels.iter().position(|&l| l > 1) {
            return Err(Error::InvalidSeries(format!(
                "label {} at index {pos} is not binary",
                labels[pos]
            )));
        }
        if let Some(pos) = values.as_slice().iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue {
                row: pos / values.cols(),
                column: pos % values.cols(),
            });
        }
        Ok(Self {
            name: name.into(),
            domain: domain.into(),
            values,
            labels,
        })
    }

    /// Univariate convenience constructor.
    pub fn univariate(
        name: impl Into<String>,
        domain: impl Into<String>,
        values: &[f64],
        labels: Vec<u8>,
    ) -> Result<Self> {
        TimeSeries::new(name, domain, Matrix::from_column(values), labels)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> &str {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.values.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.values.cols()
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn channel(&self, d: usize) -> Vec<f64> {
        self.values.column(d)
    }

    pub fn anomaly_ratio(&self) -> f64 {
        let positives: usize = self.labels.iter().map(|&l| l as usize).sum();
        positives as f64 / self.len() as f64
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_domain(mut self, domain: impl Into<String>) -> Self {
        self.domain = domain.into();
        self
    }

    /// Same labels and metadata, new values (validated).
    pub fn with_values(&self, values: Matrix) -> Result<Self> {
        TimeSeries::new(self.name.clone(), self.domain.clone(), values, self.labels.clone())
    }

    /// Same values and metadata, new labels (validated).
    pub fn with_labels(&self, labels: Vec<u8>) -> Result<Self> {
        TimeSeries::new(self.name.clone(), self.domain.clone(), self.values.clone(), labels)
    }
}

/// Contiguous train / validation / test boundaries.
///
/// train = `[0, train_end)`, validation = `[train_end, val_end)`,
/// test = `[val_end, test_end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train_end: usize,
    pub val_end: usize,
    pub test_end: usize,
}

impl Split {
    pub fn new(train_end: usize, val_end: usize, test_end: usize) -> Result<Self> {
        if train_end == 0 {
            return Err(Error::DegenerateSplit("empty train segment".into()));
        }
        if train_end > val_end {
            return Err(Error::DegenerateSplit(format!(
                "train_end {train_end} exceeds val_end {val_end}"
            )));
        }
        if val_end >= test_end {
            return Err(Error::DegenerateSplit(format!(
                "empty test segment (val_end {val_end}, length {test_end})"
            )));
        }
        Ok(Self {
            train_end,
            val_end,
            test_end,
        })
    }

    pub fn train(&self) -> std::ops::Range<usize> {
        0..self.train_end
    }

    pub fn validation(&self) -> std::ops::Range<usize> {
        self.train_end..self.val_end
    }

    pub fn test(&self) -> std::ops::Range<usize> {
        self.val_end..self.test_end
    }

    pub fn train_len(&self) -> usize {
        self.train_end
    }

    pub fn val_len(&self) -> usize {
        self.val_end - self.train_end
    }

    pub fn test_len(&self) -> usize {
        self.test_end - self.val_end
    }
}

/// Per-point anomaly scores for a segment; higher means more anomalous.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSeries {
    scores: Vec<f64>,
    aligned_offset: usize,
}

impl ScoreSeries {
    pub fn new(scores: Vec<f64>, aligned_offset: usize) -> Result<Self> {
        if let Some(pos) = scores.iter().position(|s| !s.is_finite()) {
            return Err(Error::NonFiniteValue { row: pos, column: 0 });
        }
        Ok(Self {
            scores,
            aligned_offset,
        })
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn aligned_offset(&self) -> usize {
        self.aligned_offset
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.scores
    }
}

/// Binary predictions thresholded from a [`ScoreSeries`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictionSeries(pub Vec<u8>);

impl PredictionSeries {
    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Half-open anomalous interval `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AnomalyEvent {
    pub start: usize,
    pub end: usize,
}

impl AnomalyEvent {
    pub fn new(start: usize, end: usize) -> Self {
        assert!(start < end, "event must be non-empty: [{start}, {end})");
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }

    pub fn contains(&self, i: usize) -> bool {
        self.start <= i && i < self.end
    }
}

/// Maximal runs of non-zero entries, ascending and disjoint.
pub fn extract_events(binary: &[u8]) -> Vec<AnomalyEvent> {
    let mut events = Vec::new();
    let mut start = None;
    for (i, &b) in binary.iter().enumerate() {
        match (b != 0, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                events.push(AnomalyEvent { start: s, end: i });
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        events.push(AnomalyEvent {
            start: s,
            end: binary.len(),
        });
    }
    events
}

/// Paint events back onto a zero vector of length `len`.
pub fn render_events(events: &[AnomalyEvent], len: usize) -> Vec<u8> {
    let mut out = vec![0u8; len];
    for e in events {
        for v in &mut out[e.start..e.end.min(len)] {
            *v = 1;
        }
    }
    out
}

/// Named metric values for one evaluation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub entries: BTreeMap<String, f64>,
    /// Threshold (percentile) that produced this report, for single-threshold
    /// reports; for a best-over-thresholds summary, the threshold of the best F1.
    pub threshold_used: Option<f64>,
    /// Producing threshold for each label-based metric in a summary report.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub best_thresholds: BTreeMap<String, f64>,
}

impl MetricReport {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.get(name).copied()
    }
}

/// Evaluation strategy: how much training data the detector sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Zero,
    Few,
    Full,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Zero => "zero",
            Strategy::Few => "few",
            Strategy::Full => "full",
        })
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" => Ok(Strategy::Zero),
            "few" => Ok(Strategy::Few),
            "full" => Ok(Strategy::Full),
            other => Err(Error::InvalidArgument(format!("unknown strategy `{other}`"))),
        }
    }
}

/// How test windows are laid out.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Overlap {
    #[default]
    NonOverlapping,
    Overlapping,
}

impl fmt::Display for Overlap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Overlap::NonOverlapping => "non_overlapping",
            Overlap::Overlapping => "overlapping",
        })
    }
}

impl FromStr for Overlap {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "non_overlapping" | "non-overlapping" => Ok(Overlap::NonOverlapping),
            "overlapping" => Ok(Overlap::Overlapping),
            other => Err(Error::InvalidArgument(format!("unknown overlap `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "lowercase")]
pub enum RunStatus {
    Ok,
    Failed { reason: String },
}

impl RunStatus {
    pub fn is_ok(&self) -> bool {
        matches!(self, RunStatus::Ok)
    }
}

/// Full provenance of one (series, detector configuration) run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: String,
    pub detector_id: String,
    pub kind: String,
    pub hyperparams: BTreeMap<String, serde_json::Value>,
    pub seed: u64,
    pub strategy: Strategy,
    pub few_fraction: Option<f64>,
    pub window: usize,
    pub overlap: Overlap,
    pub point_adjust: bool,
    /// Set when a zero-shot run fitted an unsupervised detector on the test
    /// segment itself.
    pub fit_on_test: bool,
    pub series_name: String,
    pub dataset: String,
    pub split: Split,
    pub train_seconds: f64,
    pub infer_seconds: f64,
    pub peak_memory_bytes: Option<u64>,
    pub status: RunStatus,
    pub report: Option<MetricReport>,
    pub per_threshold: Vec<MetricReport>,
    pub version: String,
}

/// Characteristic and anomaly-type tags carried by a manifest entry.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesTags {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anomaly_type: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub characteristics: Vec<String>,
}

/// One series of a corpus manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    /// Path to the CSV, relative to the manifest's directory unless absolute.
    pub path: PathBuf,
    pub domain: String,
    pub dim: usize,
    pub length: usize,
    pub anomaly_ratio: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_end: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub val_end: Option<usize>,
    /// Dataset group used for aggregation; defaults to the domain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<String>,
    #[serde(default)]
    pub tags: SeriesTags,
}

impl ManifestEntry {
    pub fn dataset_name(&self) -> &str {
        self.dataset.as_deref().unwrap_or(&self.domain)
    }
}

/// Corpus-level metadata; serialized as a JSON array of entries.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    pub fn get(&self, name: &str) -> Option<&ManifestEntry> {
        self.entries.iter().find(|e| e.name == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn events_of_simple_vector() {
        assert_eq!(
            extract_events(&[0, 1, 1, 0, 1]),
            vec![AnomalyEvent::new(1, 3), AnomalyEvent::new(4, 5)]
        );
        assert!(extract_events(&[0, 0, 0]).is_empty());
        assert!(extract_events(&[]).is_empty());
    }

    #[test]
    fn events_cover_exactly_the_positive_indices() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let v: Vec<u8> = (0..50).map(|_| rng.gen_range(0..2)).collect();
        let expected: Vec<usize> = (0..50).filter(|&i| v[i] == 1).collect();
        let events = extract_events(&v);
        let mut covered = Vec::new();
        for w in events.windows(2) {
            assert!(w[0].end < w[1].start, "events must be maximal and sorted");
        }
        for e in &events {
            covered.extend(e.start..e.end);
        }
        assert_eq!(covered, expected);
    }

    #[test]
    fn series_validation() {
        assert!(TimeSeries::univariate("a", "d", &[1.0, 2.0], vec![0, 2]).is_err());
        assert!(TimeSeries::univariate("a", "d", &[1.0, 2.0], vec![0]).is_err());
        assert!(matches!(
            TimeSeries::univariate("a", "d", &[1.0, f64::NAN], vec![0, 0]),
            Err(Error::NonFiniteValue { row: 1, column: 0 })
        ));
        let s = TimeSeries::univariate("a", "d", &[1.0, 2.0, 9.0, 2.0], vec![0, 0, 1, 0]).unwrap();
        assert_eq!(s.anomaly_ratio(), 0.25);
    }

    #[test]
    fn split_rejects_empty_segments() {
        assert!(Split::new(0, 5, 10).is_err());
        assert!(Split::new(5, 10, 10).is_err());
        assert!(Split::new(6, 5, 10).is_err());
        let s = Split::new(4, 5, 10).unwrap();
        assert_eq!((s.train_len(), s.val_len(), s.test_len()), (4, 1, 5));
    }

    proptest! {
        #[test]
        fn render_then_extract_is_identity(v in proptest::collection::vec(0u8..2, 0..200)) {
            let events = extract_events(&v);
            prop_assert_eq!(render_events(&events, v.len()), v);
        }

        #[test]
        fn anomaly_ratio_depends_only_on_labels(
            labels in proptest::collection::vec(0u8..2, 1..100),
            scale in 0.1f64..10.0,
        ) {
            let n = labels.len();
            let a: Vec<f64> = (0..n).map(|i| i as f64).collect();
            let b: Vec<f64> = a.iter().map(|x| x * scale - 3.0).collect();
            let sa = TimeSeries::univariate("a", "d", &a, labels.clone()).unwrap();
            let sb = TimeSeries::univariate("b", "d", &b, labels).unwrap();
            prop_assert_eq!(sa.anomaly_ratio(), sb.anomaly_ratio());
        }
    }
}
