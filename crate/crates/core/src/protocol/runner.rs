use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::windows::WindowPolicy;
use crate::detectors::grid::{Grid, GridConfig};
use crate::detectors::{build_with_window, DetectorKind};
use crate::error::{Error, Result};
use crate::ingest::{split_series, zscore_normalize, Corpus, SplitPolicy};
use crate::metrics::{evaluate_all, metric_names, EvalConfig, RangeParams, ThresholdPolicy, VusParams};
use crate::types::{Matrix, MetricReport, RunRecord, RunStatus, Split, Strategy, TimeSeries};

/// How much training data a detector sees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategyConfig {
    pub mode: Strategy,
    /// Fraction of the train segment used by few-shot runs.
    pub few_fraction: f64,
}

pub const DEFAULT_FEW_FRACTION: f64 = 0.05;

impl StrategyConfig {
    pub fn new(mode: Strategy) -> Self {
        Self {
            mode,
            few_fraction: DEFAULT_FEW_FRACTION,
        }
    }

    pub fn few(fraction: f64) -> Result<Self> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "few-shot fraction {fraction} outside (0, 1]"
            )));
        }
        Ok(Self {
            mode: Strategy::Few,
            few_fraction: fraction,
        })
    }

    /// Rows handed to `fit`, or `None` for zero-shot.
    pub fn fit_rows(&self, split: &Split) -> Option<std::ops::Range<usize>> {
        match self.mode {
            Strategy::Zero => None,
            Strategy::Few => {
                let n = split.train_len();
                let take = ((self.few_fraction * n as f64 - 1e-9).ceil() as usize).clamp(1, n);
                Some(n - take..split.val_end)
            }
            Strategy::Full => Some(0..split.val_end),
        }
    }
}

/// Everything about a run except the series and the detector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub strategy: StrategyConfig,
    /// Fallback window for kinds whose spec leaves `window` unset; also the
    /// test-time window layout.
    pub window: WindowPolicy,
    pub thresholds: ThresholdPolicy,
    pub range: RangeParams,
    /// Experiment flag: point-adjust predictions before label metrics.
    pub point_adjust: bool,
}

impl RunConfig {
    pub fn new(strategy: StrategyConfig, window: WindowPolicy) -> Self {
        Self {
            strategy,
            window,
            thresholds: ThresholdPolicy::default(),
            range: RangeParams::default(),
            point_adjust: false,
        }
    }
}

/// Peak resident set size of this process, where the platform reports it.
pub fn peak_memory_bytes() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}

pub fn run_id(series: &str, detector_id: &str, config: &RunConfig) -> String {
    format!(
        "{series}:{detector_id}:{}:{}:{}",
        config.strategy.mode, config.window.window, config.window.overlap
    )
}

struct Outcome {
    fit_on_test: bool,
    window: usize,
    train_seconds: f64,
    infer_seconds: f64,
    report: MetricReport,
    per_threshold: Vec<MetricReport>,
}

fn execute(series: &TimeSeries, split: &Split, grid: &GridConfig, config: &RunConfig) -> Result<Outcome> {
    let normalized = zscore_normalize(series, split)?;
    let values = normalized.values();
    let detector = build_with_window(&grid.spec, Some(config.window.window))?;
    let test = values.slice_rows(split.val_end, split.test_end);
    let (fit_data, fit_on_test) = match config.strategy.fit_rows(split) {
        Some(rows) => (values.slice_rows(rows.start, rows.end), false),
        None if grid.spec.kind.is_fit_free() => (Matrix::empty(values.cols()), false),
        None => (test.clone(), true),
    };

    let started = Instant::now();
    let fitted = detector.fit(&fit_data)?;
    let train_seconds = started.elapsed().as_secs_f64();
    let started = Instant::now();
    let scores = fitted.score(&test, config.window.overlap)?;
    let infer_seconds = started.elapsed().as_secs_f64();

    let window = detector.window().unwrap_or(config.window.window);
    let eval = EvalConfig {
        policy: config.thresholds.clone(),
        range: config.range,
        vus: VusParams::new(window as f64),
        point_adjust: config.point_adjust,
    };
    let truth = &series.labels()[split.test()];
    let evaluation = evaluate_all(&scores, truth, &eval)?;
    Ok(Outcome {
        fit_on_test,
        window,
        train_seconds,
        infer_seconds,
        report: evaluation.report,
        per_threshold: evaluation.per_threshold,
    })
}

/// Run one detector configuration on one series. Splits always come from
/// the ingest rules; any failure becomes a failed record.
pub fn run(
    series: &TimeSeries,
    dataset: &str,
    split_policy: &SplitPolicy,
    grid: &GridConfig,
    config: &RunConfig,
) -> RunRecord {
    let detector_id = grid.detector_id();
    let split = split_series(series, split_policy);
    let outcome = split
        .as_ref()
        .map_err(|e| Error::DegenerateSplit(e.to_string()))
        .and_then(|s| execute(series, s, grid, config));
    let mut record = RunRecord {
        run_id: run_id(series.name(), &detector_id, config),
        detector_id,
        kind: grid.spec.kind.to_string(),
        hyperparams: grid.spec.params.clone(),
        seed: grid.spec.seed,
        strategy: config.strategy.mode,
        few_fraction: (config.strategy.mode == Strategy::Few).then_some(config.strategy.few_fraction),
        window: config.window.window,
        overlap: config.window.overlap,
        point_adjust: config.point_adjust,
        fit_on_test: false,
        series_name: series.name().to_string(),
        dataset: dataset.to_string(),
        split: split.unwrap_or(Split {
            train_end: 0,
            val_end: 0,
            test_end: series.len(),
        }),
        train_seconds: 0.0,
        infer_seconds: 0.0,
        peak_memory_bytes: peak_memory_bytes(),
        status: RunStatus::Ok,
        report: None,
        per_threshold: Vec::new(),
        version: env!("CARGO_PKG_VERSION").to_string(),
    };
    match outcome {
        Ok(o) => {
            record.fit_on_test = o.fit_on_test;
            record.window = o.window;
            record.train_seconds = o.train_seconds;
            record.infer_seconds = o.infer_seconds;
            record.report = Some(o.report);
            record.per_threshold = o.per_threshold;
        }
        Err(e) => record.status = RunStatus::Failed { reason: e.to_string() },
    }
    record
}

/// Best record of one (series, kind) pair under the selection metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub series_name: String,
    pub kind: String,
    /// Index into the sweep's record list.
    pub record: usize,
    pub detector_id: String,
    pub metric: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub records: Vec<RunRecord>,
    pub selections: Vec<Selection>,
}

pub const DEFAULT_SELECTION_METRIC: &str = "VUS-PR";

pub fn check_metric_name(name: &str) -> Result<()> {
    if metric_names().any(|n| n == name) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("unknown metric `{name}`")))
    }
}

/// Per (series, kind), the successful record with the highest value of
/// `metric`; the earliest record wins ties.
pub fn select_best(records: &[RunRecord], metric: &str) -> Result<Vec<Selection>> {
    check_metric_name(metric)?;
    let mut best: BTreeMap<(String, String), Selection> = BTreeMap::new();
    let mut order = Vec::new();
    for (i, r) in records.iter().enumerate() {
        let Some(value) = r.report.as_ref().and_then(|rep| rep.get(metric)) else {
            continue;
        };
        let key = (r.series_name.clone(), r.kind.clone());
        let candidate = Selection {
            series_name: r.series_name.clone(),
            kind: r.kind.clone(),
            record: i,
            detector_id: r.detector_id.clone(),
            metric: metric.to_string(),
            value,
        };
        match best.get(&key) {
            Some(b) if b.value >= value => {}
            Some(_) => {
                best.insert(key, candidate);
            }
            None => {
                order.push(key.clone());
                best.insert(key, candidate);
            }
        }
    }
    Ok(order.into_iter().map(|k| best.remove(&k).unwrap()).collect())
}

/// Options of [`grid_run`].
#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub run: RunConfig,
    pub selection_metric: String,
    /// Worker threads; `None` uses rayon's default.
    pub threads: Option<usize>,
}

/// Run every grid configuration on every series of the corpus. Records come
/// back in (series, grid) order regardless of scheduling.
pub fn grid_run(corpus: &Corpus, grid: &Grid, options: &SweepOptions) -> Result<SweepResult> {
    check_metric_name(&options.selection_metric)?;
    let tasks: Vec<(usize, usize)> = (0..corpus.series.len())
        .flat_map(|s| (0..grid.len()).map(move |g| (s, g)))
        .collect();
    let work = || -> Vec<RunRecord> {
        tasks
            .par_iter()
            .map(|&(s, g)| {
                let entry = &corpus.manifest.entries[s];
                run(
                    &corpus.series[s],
                    entry.dataset_name(),
                    &SplitPolicy::for_entry(entry),
                    &grid.configs()[g],
                    &options.run,
                )
            })
            .collect()
    };
    let records = match options.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?
            .install(work),
        None => work(),
    };
    let selections = select_best(&records, &options.selection_metric)?;
    Ok(SweepResult { records, selections })
}

/// Kinds present in a sweep, in canonical order.
pub fn kinds_of(records: &[RunRecord]) -> Vec<DetectorKind> {
    DetectorKind::ALL
        .into_iter()
        .filter(|k| records.iter().any(|r| r.kind == k.as_str()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detectors::DetectorSpec;
    use crate::synthesis::{gen_suite, AnomalyKind, SuiteConfig};
    use crate::types::Overlap;

    fn config(mode: Strategy) -> RunConfig {
        RunConfig::new(StrategyConfig::new(mode), WindowPolicy::new(16, Overlap::NonOverlapping).unwrap())
    }

    fn corpus(n: usize) -> Corpus {
        gen_suite(AnomalyKind::Global, n, 11, &SuiteConfig::default()).unwrap()
    }

    fn grid_of(specs: Vec<(&str, DetectorSpec)>) -> Grid {
        Grid::from_configs(
            specs
                .into_iter()
                .map(|(n, spec)| GridConfig { name: n.into(), spec })
                .collect(),
        )
    }

    #[test]
    fn few_shot_rows() {
        let split = Split::new(1000, 1250, 2500).unwrap();
        let s = StrategyConfig::few(0.05).unwrap();
        assert_eq!(s.fit_rows(&split), Some(950..1250));
        assert_eq!(StrategyConfig::new(Strategy::Full).fit_rows(&split), Some(0..1250));
        assert_eq!(StrategyConfig::new(Strategy::Zero).fit_rows(&split), None);
        assert!(StrategyConfig::few(0.0).is_err());
    }

    #[test]
    fn zero_shot_fits_unsupervised_kinds_on_test() {
        let c = corpus(1);
        let (entry, series) = c.iter().next().unwrap();
        let g = GridConfig { name: "a".into(), spec: DetectorSpec::new(DetectorKind::Hbos) };
        let r = run(series, entry.dataset_name(), &SplitPolicy::for_entry(entry), &g, &config(Strategy::Zero));
        assert!(r.status.is_ok(), "{:?}", r.status);
        assert!(r.fit_on_test);
        assert!(r.train_seconds > 0.0);
        let g = GridConfig { name: "a".into(), spec: DetectorSpec::new(DetectorKind::SpectralResidual) };
        let r = run(series, entry.dataset_name(), &SplitPolicy::for_entry(entry), &g, &config(Strategy::Zero));
        assert!(r.status.is_ok() && !r.fit_on_test);
    }

    #[test]
    fn failures_become_records() {
        let c = corpus(1);
        let (entry, series) = c.iter().next().unwrap();
        let spec = DetectorSpec::new(DetectorKind::Lof).with_param("k", 5000);
        let g = GridConfig { name: "big".into(), spec };
        let r = run(series, entry.dataset_name(), &SplitPolicy::for_entry(entry), &g, &config(Strategy::Full));
        assert!(matches!(r.status, RunStatus::Failed { .. }));
        assert!(r.report.is_none());
    }

    #[test]
    fn sweep_counts_and_selection() {
        let c = corpus(2);
        let g = grid_of(vec![
            ("a", DetectorSpec::new(DetectorKind::Zscore)),
            ("b", DetectorSpec::new(DetectorKind::Zscore).with_param("robust", true)),
            ("c", DetectorSpec::new(DetectorKind::Zscore)),
        ]);
        let opts = SweepOptions {
            run: config(Strategy::Full),
            selection_metric: "AUC-ROC".into(),
            threads: Some(2),
        };
        let out = grid_run(&c, &g, &opts).unwrap();
        assert_eq!(out.records.len(), 6);
        assert_eq!(out.selections.len(), 2);
        for s in &out.selections {
            let max = out
                .records
                .iter()
                .filter(|r| r.series_name == s.series_name)
                .map(|r| r.report.as_ref().unwrap().get("AUC-ROC").unwrap())
                .fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(s.value, max);
            // Configs a and c are identical: c never displaces a.
            assert_ne!(s.detector_id, "zscore/c");
        }
    }

    #[test]
    fn unknown_selection_metric() {
        let opts = SweepOptions {
            run: config(Strategy::Full),
            selection_metric: "F2".into(),
            threads: None,
        };
        assert!(grid_run(&corpus(1), &Grid::from_configs(vec![]), &opts).is_err());
    }
}
