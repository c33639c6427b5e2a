//! Method-by-group leaderboards and critical-difference diagram data.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::select_best;
use crate::stats::{mean_ranks, RankTable};
use crate::types::{DatasetManifest, RunRecord};

/// Column grouping of a leaderboard.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupBy {
    Dataset,
    AnomalyType,
    /// A series counts toward every characteristic it is tagged with.
    Characteristic,
}

impl FromStr for GroupBy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dataset" => Ok(GroupBy::Dataset),
            "anomaly_type" => Ok(GroupBy::AnomalyType),
            "characteristic" => Ok(GroupBy::Characteristic),
            other => Err(Error::InvalidArgument(format!("unknown grouping `{other}`"))),
        }
    }
}

impl fmt::Display for GroupBy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GroupBy::Dataset => "dataset",
            GroupBy::AnomalyType => "anomaly_type",
            GroupBy::Characteristic => "characteristic",
        })
    }
}

/// Group labels of one series; `dataset` is the record's fallback.
fn groups_of(series: &str, dataset: &str, manifest: &DatasetManifest, by: GroupBy) -> Vec<String> {
    let entry = manifest.get(series);
    match by {
        GroupBy::Dataset => vec![entry.map_or(dataset, |e| e.dataset_name()).to_string()],
        GroupBy::AnomalyType => vec![entry
            .and_then(|e| e.tags.anomaly_type.clone())
            .unwrap_or_else(|| "untagged".into())],
        GroupBy::Characteristic => match entry {
            Some(e) if !e.tags.characteristics.is_empty() => e.tags.characteristics.clone(),
            _ => vec!["untagged".into()],
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardRow {
    pub method: String,
    pub mean_rank: f64,
    /// Mean of the selected metric per group; `None` without a successful run.
    pub cells: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leaderboard {
    pub metric: String,
    pub group_by: GroupBy,
    pub groups: Vec<String>,
    /// Sorted by mean rank over groups, then method name.
    pub rows: Vec<LeaderboardRow>,
}

impl Leaderboard {
    /// Method x group matrix for ranking; empty cells rank last.
    pub fn matrix(&self) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|r| r.cells.iter().map(|c| c.unwrap_or(f64::NEG_INFINITY)).collect())
            .collect()
    }

    pub fn methods(&self) -> Vec<String> {
        self.rows.iter().map(|r| r.method.clone()).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let mut header = vec!["method".to_string(), "mean_rank".to_string()];
        header.extend(self.groups.iter().cloned());
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&header).expect("in-memory write");
        for r in &self.rows {
            let mut row = vec![r.method.clone(), r.mean_rank.to_string()];
            row.extend(r.cells.iter().map(|c| c.map(|v| v.to_string()).unwrap_or_default()));
            w.write_record(&row).expect("in-memory write");
        }
        out.push_str(&String::from_utf8(w.into_inner().expect("flush")).expect("utf-8"));
        out
    }

    /// Fixed-width text table with 4-decimal cells.
    pub fn to_text(&self) -> String {
        let width = self.rows.iter().map(|r| r.method.len()).max().unwrap_or(6).max(6);
        let cols: Vec<usize> = self.groups.iter().map(|g| g.len().max(6)).collect();
        let mut out = format!("{:<width$}  {:>9}", "method", "mean_rank");
        for (g, w) in self.groups.iter().zip(&cols) {
            let _ = write!(out, "  {g:>w$}");
        }
        out.push('\n');
        for r in &self.rows {
            let _ = write!(out, "{:<width$}  {:>9.3}", r.method, r.mean_rank);
            for (c, w) in r.cells.iter().zip(&cols) {
                match c {
                    Some(v) => {
                        let _ = write!(out, "  {v:>w$.4}");
                    }
                    None => {
                        let _ = write!(out, "  {:>w$}", "-");
                    }
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Best configuration per (series, detector kind) under `metric`, averaged
/// per group. Methods are detector kinds.
pub fn leaderboard(
    records: &[RunRecord],
    manifest: &DatasetManifest,
    metric: &str,
    by: GroupBy,
) -> Result<Leaderboard> {
    let selections = select_best(records, metric)?;
    let mut sums: BTreeMap<(String, String), (f64, usize)> = BTreeMap::new();
    let mut groups = BTreeSet::new();
    let mut methods = BTreeSet::new();
    for s in &selections {
        let r = &records[s.record];
        methods.insert(s.kind.clone());
        for g in groups_of(&s.series_name, &r.dataset, manifest, by) {
            groups.insert(g.clone());
            let cell = sums.entry((s.kind.clone(), g)).or_default();
            cell.0 += s.value;
            cell.1 += 1;
        }
    }
    let groups: Vec<String> = groups.into_iter().collect();
    let mut rows: Vec<LeaderboardRow> = methods
        .into_iter()
        .map(|m| LeaderboardRow {
            cells: groups
                .iter()
                .map(|g| sums.get(&(m.clone(), g.clone())).map(|(s, n)| s / *n as f64))
                .collect(),
            method: m,
            mean_rank: 0.0,
        })
        .collect();
    if !rows.is_empty() {
        let matrix: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| r.cells.iter().map(|c| c.unwrap_or(f64::NEG_INFINITY)).collect())
            .collect();
        for (r, rank) in rows.iter_mut().zip(mean_ranks(&matrix, true)?) {
            r.mean_rank = rank;
        }
    }
    rows.sort_by(|a, b| a.mean_rank.total_cmp(&b.mean_rank).then_with(|| a.method.cmp(&b.method)));
    Ok(Leaderboard {
        metric: metric.to_string(),
        group_by: by,
        groups,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdMethod {
    pub name: String,
    pub mean_rank: f64,
}

/// A horizontal bar joining methods whose ranks are not significantly apart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdSegment {
    pub from_rank: f64,
    pub to_rank: f64,
    pub methods: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdDiagram {
    pub critical_difference: f64,
    pub alpha: f64,
    /// Methods on the rank axis, best first; all methods were ranked.
    pub methods: Vec<CdMethod>,
    /// Methods ranked but left off the display.
    pub hidden: usize,
    pub segments: Vec<CdSegment>,
}

/// Diagram data for the `top` best-ranked methods (all when `None`). Ranks
/// and the CD always come from the full table.
pub fn cd_diagram_data(table: &RankTable, top: Option<usize>) -> CdDiagram {
    let shown = top.unwrap_or(table.order.len()).min(table.order.len());
    let methods: Vec<CdMethod> = table.order[..shown]
        .iter()
        .map(|&i| CdMethod {
            name: table.methods[i].clone(),
            mean_rank: table.mean_ranks[i],
        })
        .collect();
    let mut segments: Vec<CdSegment> = Vec::new();
    let mut last_end = None;
    for &(start, end) in &table.groups {
        let end = end.min(shown.saturating_sub(1));
        if start >= shown || end <= start || last_end.is_some_and(|e| end <= e) {
            continue;
        }
        last_end = Some(end);
        segments.push(CdSegment {
            from_rank: methods[start].mean_rank,
            to_rank: methods[end].mean_rank,
            methods: methods[start..=end].iter().map(|m| m.name.clone()).collect(),
        });
    }
    CdDiagram {
        critical_difference: table.critical_difference,
        alpha: table.alpha,
        hidden: table.order.len() - shown,
        methods,
        segments,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::metric_names;
    use crate::stats::rank_table;
    use crate::types::{ManifestEntry, MetricReport, Overlap, RunStatus, SeriesTags, Split, Strategy};

    fn rec(series: &str, dataset: &str, kind: &str, name: &str, v: f64) -> RunRecord {
        RunRecord {
            run_id: format!("{series}:{kind}/{name}"),
            detector_id: format!("{kind}/{name}"),
            kind: kind.into(),
            hyperparams: BTreeMap::new(),
            seed: 0,
            strategy: Strategy::Full,
            few_fraction: None,
            window: 8,
            overlap: Overlap::NonOverlapping,
            point_adjust: false,
            fit_on_test: false,
            series_name: series.into(),
            dataset: dataset.into(),
            split: Split::new(1, 2, 3).unwrap(),
            train_seconds: 0.0,
            infer_seconds: 0.0,
            peak_memory_bytes: None,
            status: RunStatus::Ok,
            report: Some(MetricReport {
                entries: metric_names().map(|n| (n.to_string(), v)).collect(),
                ..Default::default()
            }),
            per_threshold: vec![],
            version: "0".into(),
        }
    }

    fn entry(name: &str, anomaly: &str) -> ManifestEntry {
        ManifestEntry {
            name: name.into(),
            path: format!("{name}.csv").into(),
            domain: "synthetic".into(),
            dim: 1,
            length: 100,
            anomaly_ratio: 0.1,
            train_end: None,
            val_end: None,
            dataset: None,
            tags: SeriesTags {
                anomaly_type: Some(anomaly.into()),
                characteristics: vec![],
            },
        }
    }

    #[test]
    fn single_cell() {
        let recs = [rec("a", "d", "knn", "k5", 0.4), rec("a", "d", "knn", "k10", 0.7)];
        let lb = leaderboard(&recs, &DatasetManifest::default(), "VUS-PR", GroupBy::Dataset).unwrap();
        assert_eq!(lb.groups, vec!["d"]);
        assert_eq!(lb.rows.len(), 1);
        assert_eq!(lb.rows[0].cells, vec![Some(0.7)]);
    }

    #[test]
    fn anomaly_type_columns_from_manifest() {
        let types = ["global", "contextual", "shapelet", "seasonal", "trend", "mixed"];
        let manifest = DatasetManifest {
            entries: types.iter().map(|t| entry(&format!("{t}_0"), t)).collect(),
        };
        let recs: Vec<RunRecord> = types
            .iter()
            .flat_map(|t| {
                let s = format!("{t}_0");
                [rec(&s, "x", "zscore", "a", 0.9), rec(&s, "x", "lof", "a", 0.5)]
            })
            .collect();
        let lb = leaderboard(&recs, &manifest, "AUC-ROC", GroupBy::AnomalyType).unwrap();
        assert_eq!(lb.groups.len(), 6);
        assert_eq!(lb.methods(), vec!["zscore", "lof"]);
        assert_eq!(lb.rows[0].mean_rank, 1.0);
    }

    #[test]
    fn ordering_matches_rank_table() {
        let recs: Vec<RunRecord> = ["d1", "d2", "d3"]
            .iter()
            .enumerate()
            .flat_map(|(i, d)| {
                let s = format!("s{i}");
                [
                    rec(&s, d, "a", "x", 0.1 * i as f64),
                    rec(&s, d, "b", "x", 0.5),
                    rec(&s, d, "c", "x", 0.9 - 0.3 * i as f64),
                ]
            })
            .collect();
        let lb = leaderboard(&recs, &DatasetManifest::default(), "F1", GroupBy::Dataset).unwrap();
        let table = rank_table(&lb.methods(), &lb.matrix(), true, 0.05).unwrap();
        let by_table: Vec<String> = table.order.iter().map(|&i| table.methods[i].clone()).collect();
        assert_eq!(lb.methods(), by_table);
        let ranks: Vec<f64> = lb.rows.iter().map(|r| r.mean_rank).collect();
        assert_eq!(ranks, table.order.iter().map(|&i| table.mean_ranks[i]).collect::<Vec<_>>());
    }

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn cd_segments() {
        // One method always better over many datasets: far apart.
        let n = 40;
        let t = rank_table(&names(&["a", "b"]), &[vec![1.0; n], vec![0.0; n]], true, 0.05).unwrap();
        let d = cd_diagram_data(&t, None);
        assert!(d.segments.is_empty());
        let t = rank_table(&names(&["a", "b", "c"]), &[vec![0.5; 4], vec![0.5; 4], vec![0.5; 4]], true, 0.05).unwrap();
        let d = cd_diagram_data(&t, None);
        assert_eq!(d.segments.len(), 1);
        assert_eq!(d.segments[0].methods, names(&["a", "b", "c"]));
        assert!(d.methods.windows(2).all(|w| w[0].mean_rank <= w[1].mean_rank));
    }

    #[test]
    fn positions_sorted_and_truncated() {
        let rows = vec![
            vec![0.1, 0.2, 0.1, 0.2, 0.1, 0.2, 0.1, 0.2],
            vec![0.2, 0.1, 0.2, 0.1, 0.2, 0.1, 0.2, 0.1],
            vec![0.5; 8],
            vec![0.9; 8],
        ];
        let t = rank_table(&names(&["a", "b", "c", "d"]), &rows, true, 0.05).unwrap();
        let d = cd_diagram_data(&t, None);
        let pos: Vec<f64> = d.methods.iter().map(|m| m.mean_rank).collect();
        assert_eq!(pos, vec![1.0, 2.0, 3.5, 3.5]);
        assert_eq!(d.segments.len(), 2);
        let d = cd_diagram_data(&t, Some(2));
        assert_eq!((d.methods.len(), d.hidden), (2, 2));
        assert_eq!(d.segments.len(), 1);
        assert_eq!(d.segments[0].methods, names(&["d", "c"]));
    }
}
