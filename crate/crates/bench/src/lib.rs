//! Experiment harness for block-based phase retrieval: synthetic instances,
//! timed trials against a monolithic baseline, N/K sweeps and reports.

pub mod config;
pub mod error;
pub mod generate;
pub mod select;
pub mod sweep;
pub mod trial;

pub use config::{ExperimentConfig, KChoice, MatrixKind};
pub use error::{BenchError, Result};
pub use generate::{gen_instance, Generated};
pub use select::{select_k, KMode};
pub use sweep::{emit_report, sweep, ReportFormat, SweepRow, SweepTable, SweepVariable};
pub use trial::{run_trial, TrialRecord};
