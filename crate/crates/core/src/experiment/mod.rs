//! Seeded Monte-Carlo harness: scenarios, sweeps and result files.
//!
//! Every trial draws from its own random streams keyed by `(seed, trial)`,
//! so results do not depend on thread scheduling and reruns are
//! byte-identical.

pub mod checks;
pub mod config;
pub mod output;
pub mod run;

pub use config::{ExperimentConfig, OutputFormat, Scenario, Settings, SweepGrid};
pub use output::{emit_results, render, CSV_COLUMNS};
pub use run::{run_experiment, run_sweep, run_trial, CellSummary, ExperimentOutput, TrialResult};
