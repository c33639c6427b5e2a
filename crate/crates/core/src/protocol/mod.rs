//! The unified evaluation protocol: splits, strategies, windowing, the
//! sweep runner and per-dataset aggregation.

pub mod aggregate;
pub mod runner;
pub mod windows;

pub use aggregate::{aggregate, DatasetSummary, MethodKey};
pub use runner::{
    grid_run, run, select_best, RunConfig, Selection, StrategyConfig, SweepOptions, SweepResult,
    DEFAULT_SELECTION_METRIC,
};
pub use windows::{expand_windows, WindowPlan, WindowPolicy};
