//! Experiment harness: configuration, dataset files, multi-run campaigns and reports.

pub mod campaign;
pub mod config;
pub mod dataset;
pub mod error;
pub mod export;

pub use campaign::{aggregate, execute_run, run_campaign, Aggregate, RunArtifact};
pub use config::{CampaignConfig, ConstraintFile, Method, Task};
pub use dataset::{load_dataset, write_dataset};
pub use error::{CliError, DatasetError, Result};
pub use export::export_front;
