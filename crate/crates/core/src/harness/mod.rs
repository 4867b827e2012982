//! Experiment grid, metrics, reports and configuration.

pub mod config;
pub mod experiment;
pub mod metrics;
pub mod report;
pub mod table;

pub use config::{ClassifierKind, DataSource, ExperimentConfig};
pub use experiment::{run_experiment, ExperimentOutput, FittedPipeline};
pub use metrics::{accuracy, confusion, ConfusionMatrix};
pub use table::{ResultsTable, RunRecord};
