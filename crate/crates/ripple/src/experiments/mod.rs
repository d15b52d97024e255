//! Study orchestration: configuration ingestion, Monte Carlo fan-out,
//! scaling-law regression and result emission.

pub mod config;
pub mod output;
pub mod slope;
pub mod studies;

pub use config::{dyadic, StudyConfig, StudyKind};
pub use output::CsvRow;
pub use slope::{fit_log_linear, fit_slope, SlopeFit};
pub use studies::{run_study, CheckResult, StudyOutcome};
