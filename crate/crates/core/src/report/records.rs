//! Run-record persistence: a flat CSV for analysis tools plus one JSON file
//! per record carrying the full provenance.

use std::fs::{self, OpenOptions};
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::metrics::metric_names;
use crate::types::{RunRecord, RunStatus};

pub const RECORDS_CSV: &str = "records.csv";
pub const RUNS_DIR: &str = "runs";

/// CSV header: identity columns, the metric columns, then the trailing
/// bookkeeping columns.
pub fn csv_columns() -> Vec<String> {
    let head = ["run_id", "detector", "kind", "strategy", "series", "dataset"];
    let tail = ["best_threshold", "train_seconds", "infer_seconds", "status"];
    head.iter()
        .copied()
        .chain(metric_names())
        .chain(tail)
        .map(str::to_string)
        .collect()
}

/// File name of a record's JSON inside [`RUNS_DIR`].
pub fn record_file_name(run_id: &str) -> String {
    let stem: String = run_id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '.' | '-') { c } else { '_' })
        .collect();
    format!("{stem}.json")
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_row(r: &RunRecord) -> Vec<String> {
    let mut row = vec![
        r.run_id.clone(),
        r.detector_id.clone(),
        r.kind.clone(),
        r.strategy.to_string(),
        r.series_name.clone(),
        r.dataset.clone(),
    ];
    for name in metric_names() {
        row.push(opt(r.report.as_ref().and_then(|rep| rep.get(name))));
    }
    row.push(opt(r.report.as_ref().and_then(|rep| rep.threshold_used)));
    row.push(r.train_seconds.to_string());
    row.push(r.infer_seconds.to_string());
    row.push(match r.status {
        RunStatus::Ok => "ok".into(),
        RunStatus::Failed { .. } => "failed".into(),
    });
    row
}

/// Append records to `dir/records.csv` (writing the header for a new file)
/// and write one JSON per record under `dir/runs/`.
pub fn save_records(records: &[RunRecord], dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    let runs = dir.join(RUNS_DIR);
    fs::create_dir_all(&runs).map_err(|e| Error::io(&runs, e))?;
    let csv_path = dir.join(RECORDS_CSV);
    let columns = csv_columns();
    let fresh = match fs::File::open(&csv_path) {
        Ok(f) => {
            let mut first = String::new();
            BufReader::new(f)
                .read_line(&mut first)
                .map_err(|e| Error::io(&csv_path, e))?;
            if first.trim_end() != columns.join(",") {
                return Err(Error::SchemaMismatch {
                    path: csv_path,
                    reason: "existing file has a different header".into(),
                });
            }
            false
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => true,
        Err(e) => return Err(Error::io(&csv_path, e)),
    };
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&csv_path)
        .map_err(|e| Error::io(&csv_path, e))?;
    let mut w = csv::Writer::from_writer(file);
    if fresh {
        w.write_record(&columns)?;
    }
    for r in records {
        w.write_record(csv_row(r))?;
        let path = runs.join(record_file_name(&r.run_id));
        let mut text = serde_json::to_string_pretty(r)?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    }
    w.flush().map_err(|e| Error::io(&csv_path, e))?;
    Ok(())
}

fn mismatch(path: &Path, reason: impl Into<String>) -> Error {
    Error::SchemaMismatch {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

/// Load the records listed in `dir/records.csv`, in file order, from their
/// JSON files. The CSV columns must agree with the JSON.
pub fn load_records(dir: impl AsRef<Path>) -> Result<Vec<RunRecord>> {
    let dir = dir.as_ref();
    let csv_path = dir.join(RECORDS_CSV);
    let file = fs::File::open(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let header = reader.headers()?.clone();
    let mut index = Vec::new();
    for col in csv_columns() {
        match header.iter().position(|h| h == col) {
            Some(i) => index.push(i),
            None => return Err(mismatch(&csv_path, format!("missing column `{col}`"))),
        }
    }
    let columns = csv_columns();
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row?;
        let run_id = &row[index[0]];
        let json_path: PathBuf = dir.join(RUNS_DIR).join(record_file_name(run_id));
        let text = fs::read_to_string(&json_path).map_err(|e| Error::io(&json_path, e))?;
        let record: RunRecord = serde_json::from_str(&text)
            .map_err(|e| mismatch(&json_path, format!("not a run record: {e}")))?;
        let expected = csv_row(&record);
        for ((col, &i), want) in columns.iter().zip(&index).zip(&expected) {
            // Timings are informational; everything else must match exactly.
            if col.ends_with("_seconds") {
                continue;
            }
            if &row[i] != want {
                return Err(mismatch(
                    &csv_path,
                    format!("run `{run_id}`: column `{col}` is `{}` but the record has `{want}`", &row[i]),
                ));
            }
        }
        out.push(record);
    }
    Ok(out)
}
