//! Plumbing behind the `torvar` binary: experiment configs, JSON reports,
//! Matrix Market file I/O, the seeded trial runner, and offline
//! re-verification of emitted reports.

pub mod config;
pub mod mmio;
pub mod report;
pub mod reverify;
pub mod runner;

pub use config::ExperimentConfig;
pub use report::{Report, Summary, TrialOutcome, TrialRecord, REPORT_SCHEMA};
pub use reverify::{reverify_report, ReverifyOutcome};
pub use runner::{run_experiment, run_sweep, trial_seeds};
