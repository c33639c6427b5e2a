pub mod characteristics;
pub mod cli;
pub mod detectors;
pub mod error;
pub mod ingest;
pub mod metrics;
pub mod synthesis;
mod numeric;
pub mod protocol;
pub mod report;
pub mod stats;
pub mod types;

pub use error::{Error, Result};
