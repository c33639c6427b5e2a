//! Command-line surface. Exit codes: 0 success, 1 usage error, 2 data error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::characteristics::{classify_series, CharacteristicThresholds};
use crate::detectors::grid::Grid;
use crate::detectors::DetectorKind;
use crate::error::{Error, Result};
use crate::ingest::{load_corpus, load_manifest, write_manifest};
use crate::protocol::{grid_run, RunConfig, StrategyConfig, SweepOptions, WindowPolicy, DEFAULT_SELECTION_METRIC};
use crate::report::{cd_diagram_data, leaderboard, load_records, save_records, GroupBy};
use crate::stats::{friedman, rank_table};
use crate::synthesis::{gen_suite, merge_corpora, write_corpus, AnomalyKind, SuiteConfig};
use crate::types::{DatasetManifest, Overlap, Strategy};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "tsadbench", version, about = "Time-series anomaly detection benchmark")]
struct Cli {
    /// Seed for every random choice (synthesis, detector initialization).
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate synthetic anomaly suites.
    Inject(InjectArgs),
    /// Compute data characteristics of every series in a corpus.
    Analyze(AnalyzeArgs),
    /// Run a detector grid over a corpus.
    Bench(BenchArgs),
    /// Leaderboards and critical-difference data from saved records.
    Report(ReportArgs),
    /// Check a corpus manifest against its data.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
struct InjectArgs {
    /// Output directory for the CSVs and manifest.json.
    #[arg(long)]
    out: PathBuf,
    /// Anomaly kinds to generate (default: all six).
    #[arg(long, value_delimiter = ',')]
    kinds: Vec<String>,
    #[arg(long, default_value_t = 10)]
    series_per_kind: usize,
    #[arg(long, default_value_t = 1000)]
    length: usize,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Write JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StrategyArg {
    Zero,
    Few,
    Full,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OverlapArg {
    NonOverlapping,
    Overlapping,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Corpus manifest.
    #[arg(long)]
    corpus: PathBuf,
    /// Grid JSON; the built-in grid when omitted.
    #[arg(long)]
    grid: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "full")]
    strategy: StrategyArg,
    /// Training fraction for the few-shot strategy.
    #[arg(long)]
    few_fraction: Option<f64>,
    #[arg(long, default_value_t = 16)]
    window: usize,
    #[arg(long, value_enum, default_value = "non-overlapping")]
    overlap: OverlapArg,
    /// Restrict the grid to these detector kinds.
    #[arg(long, value_delimiter = ',')]
    kinds: Vec<String>,
    #[arg(long, env = "TSADBENCH_THREADS")]
    threads: Option<usize>,
    /// Output directory for records.
    #[arg(long)]
    out: PathBuf,
    /// Point-adjust predictions before label metrics (inflates scores).
    #[arg(long)]
    enable_point_adjust: bool,
    #[arg(long, default_value = DEFAULT_SELECTION_METRIC)]
    selection_metric: String,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Directory written by `bench`.
    #[arg(long)]
    records: PathBuf,
    /// Manifest with series tags; defaults to the copy saved by `bench`.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long, default_value = DEFAULT_SELECTION_METRIC)]
    metric: String,
    /// dataset, anomaly_type or characteristic.
    #[arg(long, default_value = "dataset")]
    group_by: String,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Write critical-difference diagram data (JSON) here.
    #[arg(long)]
    cd_out: Option<PathBuf>,
    /// Methods shown on the diagram; ranks always use all of them.
    #[arg(long)]
    top: Option<usize>,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Also check a grid file.
    #[arg(long)]
    grid: Option<PathBuf>,
}

/// Run the CLI on `args` (including the program name).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(cli, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_) | Error::UnknownKind(_) => EXIT_USAGE,
        _ => EXIT_DATA,
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Inject(a) => inject(a, cli.seed.unwrap_or(0), out),
        Command::Analyze(a) => analyze(a, out),
        Command::Bench(a) => bench(a, cli.seed, out),
        Command::Report(a) => report(a, out),
        Command::Validate(a) => validate(a, out),
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes())
        .map_err(|e| Error::io("<stdout>", e))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn inject(a: InjectArgs, seed: u64, out: &mut dyn Write) -> Result<()> {
    let kinds = if a.kinds.is_empty() {
        AnomalyKind::ALL.to_vec()
    } else {
        a.kinds.iter().map(|k| k.parse()).collect::<Result<Vec<AnomalyKind>>>()?
    };
    // Region lengths scale with the series so the anomaly budget still fits.
    let base = SuiteConfig::default();
    let scale = |l: usize| (l * a.length / base.length).clamp(2, l.max(2));
    let config = SuiteConfig {
        length: a.length,
        subsequence_length: scale(base.subsequence_length),
        mixed_length: scale(base.mixed_length),
        ..base
    };
    let parts = kinds
        .iter()
        .map(|&k| gen_suite(k, a.series_per_kind, seed, &config))
        .collect::<Result<Vec<_>>>()?;
    let corpus = merge_corpora(parts);
    write_corpus(&corpus, &a.out)?;
    emit(
        out,
        &format!("wrote {} series to {}\n", corpus.series.len(), a.out.display()),
    )
}

fn analyze(a: AnalyzeArgs, out: &mut dyn Write) -> Result<()> {
    let corpus = load_corpus(&a.corpus)?;
    let thresholds = CharacteristicThresholds::default();
    let profiles = corpus
        .series
        .iter()
        .map(|s| classify_series(s, &thresholds))
        .collect::<Result<Vec<_>>>()?;
    match a.out {
        Some(path) => write_json(&path, &profiles),
        None => emit(out, &(serde_json::to_string_pretty(&profiles)? + "\n")),
    }
}

/// Settings of a bench run, saved next to its records.
#[derive(Serialize)]
struct BenchSettings<'a> {
    corpus: &'a Path,
    grid: Option<&'a Path>,
    seed: Option<u64>,
    run: &'a RunConfig,
    selection_metric: &'a str,
    configs: usize,
    version: &'static str,
}

fn bench(a: BenchArgs, seed: Option<u64>, out: &mut dyn Write) -> Result<()> {
    let corpus = load_corpus(&a.corpus)?;
    let mut grid = match &a.grid {
        Some(path) => Grid::load(path)?,
        None => Grid::default_grid(),
    };
    if let Some(seed) = seed {
        grid = grid.with_seed(seed);
    }
    if !a.kinds.is_empty() {
        let kinds = a.kinds.iter().map(|k| k.parse()).collect::<Result<Vec<DetectorKind>>>()?;
        grid = grid.restrict(&kinds);
    }
    let strategy = match (a.strategy, a.few_fraction) {
        (StrategyArg::Few, Some(f)) => StrategyConfig::few(f)?,
        (_, Some(_)) => {
            return Err(Error::InvalidArgument("--few-fraction needs --strategy few".into()));
        }
        (StrategyArg::Zero, None) => StrategyConfig::new(Strategy::Zero),
        (StrategyArg::Few, None) => StrategyConfig::new(Strategy::Few),
        (StrategyArg::Full, None) => StrategyConfig::new(Strategy::Full),
    };
    let overlap = match a.overlap {
        OverlapArg::NonOverlapping => Overlap::NonOverlapping,
        OverlapArg::Overlapping => Overlap::Overlapping,
    };
    let mut run = RunConfig::new(strategy, WindowPolicy::new(a.window, overlap)?);
    run.point_adjust = a.enable_point_adjust;
    if a.threads == Some(0) {
        return Err(Error::InvalidArgument("--threads must be positive".into()));
    }
    let options = SweepOptions {
        run,
        selection_metric: a.selection_metric.clone(),
        threads: a.threads,
    };
    let result = grid_run(&corpus, &grid, &options)?;
    save_records(&result.records, &a.out)?;
    write_json(&a.out.join("selections.json"), &result.selections)?;
    write_manifest(&corpus.manifest, a.out.join("manifest.json"))?;
    write_json(
        &a.out.join("bench.json"),
        &BenchSettings {
            corpus: &a.corpus,
            grid: a.grid.as_deref(),
            seed,
            run: &options.run,
            selection_metric: &options.selection_metric,
            configs: grid.len(),
            version: env!("CARGO_PKG_VERSION"),
        },
    )?;
    let failed = result.records.iter().filter(|r| !r.status.is_ok()).count();
    emit(
        out,
        &format!(
            "{} runs ({} failed) over {} series; records in {}\n",
            result.records.len(),
            failed,
            corpus.series.len(),
            a.out.display()
        ),
    )
}

fn report(a: ReportArgs, out: &mut dyn Write) -> Result<()> {
    let by: GroupBy = a.group_by.parse()?;
    let records = load_records(&a.records)?;
    let manifest = match a.manifest {
        Some(path) => load_manifest(path)?,
        None => {
            let saved = a.records.join("manifest.json");
            if saved.exists() {
                load_manifest(saved)?
            } else {
                DatasetManifest::default()
            }
        }
    };
    let board = leaderboard(&records, &manifest, &a.metric, by)?;
    match a.format {
        Format::Text => {
            let mut text = format!("{} by {}\n", board.metric, board.group_by);
            text.push_str(&board.to_text());
            if let Ok(f) = friedman(&board.matrix()) {
                text.push_str(&format!("friedman chi2 = {:.4}, p = {:.4e}\n", f.statistic, f.p_value));
            }
            emit(out, &text)?;
        }
        Format::Csv => emit(out, &board.to_csv())?,
        Format::Json => emit(out, &(serde_json::to_string_pretty(&board)? + "\n"))?,
    }
    if let Some(path) = a.cd_out {
        let table = rank_table(&board.methods(), &board.matrix(), true, a.alpha)?;
        write_json(&path, &cd_diagram_data(&table, a.top))?;
    }
    Ok(())
}

fn validate(a: ValidateArgs, out: &mut dyn Write) -> Result<()> {
    let corpus = load_corpus(&a.corpus)?;
    if let Some(path) = &a.grid {
        Grid::load(path)?;
    }
    emit(out, &format!("ok: {} series\n", corpus.series.len()))
}
