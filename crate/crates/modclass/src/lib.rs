//! Experiment harness for the modulation classifiers in `modclass-core`:
//! configuration, seeded Monte Carlo trials, aggregation and file output.

pub mod config;
pub mod error;
pub mod experiment;
pub mod presets;
pub mod report;
pub mod selftest;

pub use config::{Cell, ExperimentConfig, Method};
pub use error::{HarnessError, Result};
pub use experiment::{classify, resolve_workers, run_experiment, trial_seed, TrialRecord};
pub use report::{confusion_matrix, emit_outputs, ConfusionMatrix};
