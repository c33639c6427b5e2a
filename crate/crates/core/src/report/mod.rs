//! Reporting layer: record persistence, leaderboards and CD-diagram data.

pub mod leaderboard;
pub mod records;

pub use leaderboard::{cd_diagram_data, leaderboard, CdDiagram, CdMethod, CdSegment, GroupBy, Leaderboard, LeaderboardRow};
pub use records::{csv_columns, load_records, save_records, RECORDS_CSV, RUNS_DIR};
