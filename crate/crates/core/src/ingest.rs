//! Corpus loading, splitting, normalization and univariate filtering.
//!
//! Series files are UTF-8 CSV with a header row. The last column must be
//! named `label` (0 or 1 per row); an optional leading `timestamp` column is
//! ignored; every other column is a channel.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::types::{DatasetManifest, ManifestEntry, Matrix, Split, TimeSeries};

/// Tolerance for a manifest's anomaly ratio against the loaded labels.
pub const AR_TOLERANCE: f64 = 1e-6;

/// Standard deviations below this are treated as zero by [`zscore_normalize`].
const MIN_STD: f64 = 1e-12;

/// Load one series from a unified-format CSV file. Values are returned raw.
pub fn load_series(path: impl AsRef<Path>) -> Result<TimeSeries> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "series".to_string());
    parse_series(&text, &name, path)
}

/// Parse unified-format CSV text; `origin` is only used in error messages.
pub fn parse_series(text: &str, name: &str, origin: &Path) -> Result<TimeSeries> {
    let malformed = |reason: String| Error::MalformedFile {
        path: origin.to_path_buf(),
        reason,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| malformed(e.to_string()))?
        .clone();
    if headers.len() < 2 || &headers[headers.len() - 1] != "label" {
        return Err(malformed("last column must be named `label`".into()));
    }
    let skip = usize::from(&headers[0] == "timestamp");
    let dim = headers.len() - 1 - skip;
    if dim == 0 {
        return Err(malformed("no value columns".into()));
    }

    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| malformed(e.to_string()))?;
        if record.len() != headers.len() {
            return Err(malformed(format!(
                "row {row} has {} fields, header has {}",
                record.len(),
                headers.len()
            )));
        }
        for col in 0..dim {
            let cell = &record[skip + col];
            let v: f64 = cell
                .parse()
                .map_err(|_| malformed(format!("non-numeric cell `{cell}` at row {row}")))?;
            if !v.is_finite() {
                return Err(Error::NonFiniteValue { row, column: col });
            }
            values.push(v);
        }
        let cell = &record[headers.len() - 1];
        let label = match cell.parse::<f64>() {
            Ok(v) if v == 0.0 => 0u8,
            Ok(v) if v == 1.0 => 1u8,
            _ => return Err(malformed(format!("label `{cell}` at row {row} is not 0 or 1"))),
        };
        labels.push(label);
    }
    if labels.is_empty() {
        return Err(malformed("no data rows".into()));
    }
    let matrix = Matrix::new(labels.len(), dim, values)?;
    TimeSeries::new(name, "unknown", matrix, labels)
}

/// Render a series in the unified CSV format. Floats use the shortest
/// round-trip representation, so `parse_series(write_series(s)) == s`.
pub fn write_series_csv(series: &TimeSeries) -> String {
    let mut out = String::new();
    for d in 0..series.dim() {
        out.push_str(&format!("v{d},"));
    }
    out.push_str("label\n");
    for t in 0..series.len() {
        for v in series.values().row(t) {
            out.push_str(&format!("{v},"));
        }
        out.push_str(&format!("{}\n", series.labels()[t]));
    }
    out
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<DatasetManifest> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::MalformedFile {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

pub fn write_manifest(manifest: &DatasetManifest, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(manifest)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Resolve an entry's path against the manifest location.
pub fn entry_path(manifest_path: &Path, entry: &ManifestEntry) -> PathBuf {
    if entry.path.is_absolute() {
        entry.path.clone()
    } else {
        manifest_path
            .parent()
            .unwrap_or_else(|| Path::new("."))
            .join(&entry.path)
    }
}

/// A loaded corpus: manifest entries paired with their validated series.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub manifest: DatasetManifest,
    pub series: Vec<TimeSeries>,
}

impl Corpus {
    pub fn iter(&self) -> impl Iterator<Item = (&ManifestEntry, &TimeSeries)> {
        self.manifest.entries.iter().zip(&self.series)
    }
}

/// Load every series of a manifest and check it against its entry.
pub fn load_corpus(manifest_path: impl AsRef<Path>) -> Result<Corpus> {
    let manifest_path = manifest_path.as_ref();
    let manifest = load_manifest(manifest_path)?;
    let series = manifest
        .entries
        .par_iter()
        .map(|entry| {
            let series = load_series(entry_path(manifest_path, entry))?
                .with_name(entry.name.clone())
                .with_domain(entry.domain.clone());
            check_entry(entry, &series)?;
            Ok(series)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Corpus { manifest, series })
}

/// Verify that a loaded series agrees with its manifest entry.
pub fn check_entry(entry: &ManifestEntry, series: &TimeSeries) -> Result<()> {
    let mismatch = |reason: String| Error::ManifestMismatch {
        series: entry.name.clone(),
        reason,
    };
    if series.dim() != entry.dim {
        return Err(mismatch(format!("dim {} != manifest {}", series.dim(), entry.dim)));
    }
    if series.len() != entry.length {
        return Err(mismatch(format!(
            "length {} != manifest {}",
            series.len(),
            entry.length
        )));
    }
    let ar = series.anomaly_ratio();
    if (ar - entry.anomaly_ratio).abs() > AR_TOLERANCE {
        return Err(mismatch(format!(
            "anomaly ratio {ar} != manifest {}",
            entry.anomaly_ratio
        )));
    }
    if entry.train_end.is_some() != entry.val_end.is_some() {
        return Err(mismatch("train_end and val_end must be given together".into()));
    }
    split_series(series, &SplitPolicy::for_entry(entry))
        .map_err(|e| mismatch(e.to_string()))?;
    Ok(())
}

/// How split boundaries are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SplitPolicy {
    /// Second half is test; the last 20% of the first half is validation.
    #[default]
    Default,
    /// Boundaries shipped with the raw corpus, used verbatim.
    Explicit { train_end: usize, val_end: usize },
}

impl SplitPolicy {
    pub fn for_entry(entry: &ManifestEntry) -> Self {
        match (entry.train_end, entry.val_end) {
            (Some(train_end), Some(val_end)) => SplitPolicy::Explicit { train_end, val_end },
            _ => SplitPolicy::Default,
        }
    }
}

/// Smallest series the default policy can split.
pub const MIN_SPLIT_LEN: usize = 10;

pub fn split_series(series: &TimeSeries, policy: &SplitPolicy) -> Result<Split> {
    split_len(series.len(), policy)
}

/// Split boundaries for a series of `len` points.
pub fn split_len(len: usize, policy: &SplitPolicy) -> Result<Split> {
    match *policy {
        SplitPolicy::Default => {
            if len < MIN_SPLIT_LEN {
                return Err(Error::DegenerateSplit(format!(
                    "default split needs at least {MIN_SPLIT_LEN} points, got {len}"
                )));
            }
            let test_len = len.div_ceil(2);
            let head = len - test_len;
            let val_len = (head / 5).max(1);
            let train_end = head - val_len;
            Split::new(train_end, head, len)
        }
        SplitPolicy::Explicit { train_end, val_end } => {
            if val_end > len {
                return Err(Error::DegenerateSplit(format!(
                    "val_end {val_end} beyond series length {len}"
                )));
            }
            Split::new(train_end, val_end, len)
        }
    }
}

/// Shift and scale each channel by its train-segment mean and standard
/// deviation. Channels with (near) zero train deviation are only shifted.
pub fn zscore_normalize(series: &TimeSeries, split: &Split) -> Result<TimeSeries> {
    let values = series.values();
    let train = split.train();
    if train.is_empty() {
        return Err(Error::DegenerateSplit("empty train segment".into()));
    }
    let n = train.len() as f64;
    let dim = series.dim();
    let mut mean = vec![0.0; dim];
    for t in train.clone() {
        for (m, v) in mean.iter_mut().zip(values.row(t)) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; dim];
    for t in train {
        for ((s, v), m) in var.iter_mut().zip(values.row(t)).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    let scale: Vec<f64> = var
        .iter()
        .map(|s| {
            let sd = (s / n).sqrt();
            if sd < MIN_STD {
                1.0
            } else {
                sd
            }
        })
        .collect();
    let data = values
        .as_slice()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let d = i % dim;
            (v - mean[d]) / scale[d]
        })
        .collect();
    series.with_values(Matrix::new(series.len(), dim, data)?)
}

/// Why a series was dropped by [`filter_univariate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectionRule {
    NoAnomaly,
    AnomalyRatioAboveLimit,
    NoMethodAboveAuc,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rejection {
    pub series: String,
    pub rule: RejectionRule,
}

/// Series with a higher anomaly ratio than this are dropped.
pub const MAX_ANOMALY_RATIO: f64 = 0.10;
/// At least one method must beat this AUC-ROC for a series to be kept.
pub const MIN_BEST_AUC: f64 = 0.85;

/// Apply the univariate curation rules, logging every rejection.
pub fn filter_univariate(
    series: Vec<TimeSeries>,
    auc_map: Option<&BTreeMap<String, f64>>,
) -> (Vec<TimeSeries>, Vec<Rejection>) {
    let mut kept = Vec::new();
    let mut rejected = Vec::new();
    for s in series {
        let ar = s.anomaly_ratio();
        let rule = if ar == 0.0 {
            Some(RejectionRule::NoAnomaly)
        } else if ar > MAX_ANOMALY_RATIO {
            Some(RejectionRule::AnomalyRatioAboveLimit)
        } else if let Some(map) = auc_map {
            match map.get(s.name()) {
                Some(&auc) if auc > MIN_BEST_AUC => None,
                _ => Some(RejectionRule::NoMethodAboveAuc),
            }
        } else {
            None
        };
        match rule {
            Some(rule) => rejected.push(Rejection {
                series: s.name().to_string(),
                rule,
            }),
            None => kept.push(s),
        }
    }
    (kept, rejected)
}

/// One univariate series per channel, sharing the label vector.
pub fn explode_multivariate(series: &TimeSeries) -> Result<Vec<TimeSeries>> {
    if series.dim() == 1 {
        return Ok(vec![series.clone()]);
    }
    (0..series.dim())
        .map(|d| {
            TimeSeries::univariate(
                format!("{}_{d}", series.name()),
                series.domain(),
                &series.channel(d),
                series.labels().to_vec(),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(text: &str) -> Result<TimeSeries> {
        parse_series(text, "t", Path::new("t.csv"))
    }

    #[test]
    fn loads_small_file() {
        let s = parse("v0,label\n1,0\n2,0\n9,1\n2,0\n").unwrap();
        assert_eq!((s.len(), s.dim()), (4, 1));
        assert_eq!(s.anomaly_ratio(), 0.25);
    }

    #[test]
    fn timestamp_column_is_ignored() {
        let s = parse("timestamp,a,b,label\n0,1,2,0\n1,3,4,1\n").unwrap();
        assert_eq!(s.dim(), 2);
        assert_eq!(s.values().row(1), &[3.0, 4.0]);
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(parse("v0,label\n1,2\n"), Err(Error::MalformedFile { .. })));
        assert!(matches!(parse("v0,v1\n1,0\n"), Err(Error::MalformedFile { .. })));
        assert!(matches!(parse("v0,label\nx,0\n"), Err(Error::MalformedFile { .. })));
        assert!(matches!(parse("v0,v1,label\n1,0\n"), Err(Error::MalformedFile { .. })));
        assert!(matches!(parse("v0,label\nNaN,0\n"), Err(Error::NonFiniteValue { .. })));
        assert!(matches!(parse("v0,label\ninf,0\n"), Err(Error::NonFiniteValue { .. })));
    }

    #[test]
    fn default_split_fixtures() {
        let s = split_len(100, &SplitPolicy::Default).unwrap();
        assert_eq!((s.train_end, s.val_end, s.test_end), (40, 50, 100));
        let s = split_len(10, &SplitPolicy::Default).unwrap();
        assert_eq!((s.train_end, s.val_end, s.test_end), (4, 5, 10));
        assert!(split_len(9, &SplitPolicy::Default).is_err());
    }

    #[test]
    fn explicit_split_is_verbatim() {
        let policy = SplitPolicy::Explicit {
            train_end: 30,
            val_end: 50,
        };
        let s = split_len(100, &policy).unwrap();
        assert_eq!((s.train_end, s.val_end, s.test_end), (30, 50, 100));
        let bad = SplitPolicy::Explicit {
            train_end: 30,
            val_end: 100,
        };
        assert!(matches!(split_len(100, &bad), Err(Error::DegenerateSplit(_))));
    }

    #[test]
    fn normalization_uses_train_statistics() {
        let values = [1.0, -1.0, 1.0, -1.0, 100.0, 200.0, 300.0, 400.0, 500.0, 600.0];
        let s = TimeSeries::univariate("n", "d", &values, vec![0; 10]).unwrap();
        let split = Split::new(4, 5, 10).unwrap();
        let n = zscore_normalize(&s, &split).unwrap();
        let ch = n.channel(0);
        let train = &ch[..4];
        let mean = train.iter().sum::<f64>() / 4.0;
        let var = train.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 4.0;
        assert!(mean.abs() < 1e-12 && (var - 1.0).abs() < 1e-12);
        // test points use train mean 0 and std 1, not their own statistics
        assert_eq!(&ch[5..], &[200.0, 300.0, 400.0, 500.0, 600.0]);
    }

    #[test]
    fn constant_channel_is_shifted_only() {
        let s = TimeSeries::univariate("c", "d", &[5.0; 12], vec![0; 12]).unwrap();
        let split = split_series(&s, &SplitPolicy::Default).unwrap();
        let n = zscore_normalize(&s, &split).unwrap();
        assert!(n.channel(0).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn filter_rules() {
        let mk = |name: &str, pos: usize| {
            let mut labels = vec![0u8; 100];
            labels[..pos].iter_mut().for_each(|l| *l = 1);
            TimeSeries::univariate(name, "d", &[0.0; 100], labels).unwrap()
        };
        let all = vec![mk("zero", 0), mk("high", 12), mk("ok", 5), mk("edge", 10)];
        let (kept, rejected) = filter_univariate(all.clone(), None);
        let names: Vec<_> = kept.iter().map(|s| s.name().to_string()).collect();
        assert_eq!(names, ["ok", "edge"]);
        assert_eq!(rejected[0].rule, RejectionRule::NoAnomaly);
        assert_eq!(rejected[1].rule, RejectionRule::AnomalyRatioAboveLimit);

        let auc: BTreeMap<String, f64> = [("ok".to_string(), 0.90), ("edge".to_string(), 0.85)]
            .into_iter()
            .collect();
        let (kept, rejected) = filter_univariate(all, Some(&auc));
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].name(), "ok");
        assert_eq!(rejected.last().unwrap().rule, RejectionRule::NoMethodAboveAuc);
    }

    #[test]
    fn explode_shares_labels() {
        let m = Matrix::new(5, 3, (0..15).map(f64::from).collect()).unwrap();
        let labels = vec![0, 1, 0, 0, 1];
        let s = TimeSeries::new("m", "d", m, labels.clone()).unwrap();
        let parts = explode_multivariate(&s).unwrap();
        assert_eq!(parts.len(), 3);
        for (d, p) in parts.iter().enumerate() {
            assert_eq!(p.len(), 5);
            assert_eq!(p.labels(), labels.as_slice());
            assert_eq!(p.name(), format!("m_{d}"));
        }
        let single = TimeSeries::univariate("u", "d", &[1.0, 2.0], vec![0, 1]).unwrap();
        assert_eq!(explode_multivariate(&single).unwrap(), vec![single]);
    }

    proptest! {
        #[test]
        fn default_split_partitions(len in 10usize..5000) {
            let s = split_len(len, &SplitPolicy::Default).unwrap();
            prop_assert_eq!(s.test_len(), len.div_ceil(2));
            prop_assert_eq!(s.train_len() + s.val_len() + s.test_len(), len);
            prop_assert!(s.train_len() > 0 && s.val_len() > 0);
        }

        #[test]
        fn normalization_is_idempotent(values in proptest::collection::vec(-1e3f64..1e3, 20..80)) {
            let n = values.len();
            let s = TimeSeries::univariate("p", "d", &values, vec![0; n]).unwrap();
            let split = split_series(&s, &SplitPolicy::Default).unwrap();
            let once = zscore_normalize(&s, &split).unwrap();
            let twice = zscore_normalize(&once, &split).unwrap();
            for (a, b) in once.channel(0).iter().zip(twice.channel(0)) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }

        #[test]
        fn filter_is_idempotent(ratios in proptest::collection::vec(0usize..20, 1..10)) {
            let series: Vec<_> = ratios.iter().enumerate().map(|(i, &pos)| {
                let mut labels = vec![0u8; 100];
                labels[..pos].iter_mut().for_each(|l| *l = 1);
                TimeSeries::univariate(format!("s{i}"), "d", &[0.0; 100], labels).unwrap()
            }).collect();
            let (once, _) = filter_univariate(series, None);
            let (twice, rejected) = filter_univariate(once.clone(), None);
            prop_assert_eq!(once, twice);
            prop_assert!(rejected.is_empty());
        }

        #[test]
        fn csv_round_trip(values in proptest::collection::vec(-1e6f64..1e6, 1..40)) {
            let n = values.len();
            let labels: Vec<u8> = (0..n).map(|i| (i % 3 == 0) as u8).collect();
            let s = TimeSeries::univariate("r", "unknown", &values, labels).unwrap();
            let back = parse_series(&write_series_csv(&s), "r", Path::new("r.csv")).unwrap();
            prop_assert_eq!(back, s);
        }
    }
}
