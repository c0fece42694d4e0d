//! Experiment runner: configs, seed fan-out, regret reports and the
//! property batteries behind `verify`.

mod config;
mod experiment;
pub mod verify;

use std::path::PathBuf;

use thiserror::Error;

use crate::env::EnvError;
use crate::model::ModelError;
use crate::policies::PolicyError;
use crate::reductions::ReductionError;

pub use config::{load_config, parse_config, ExperimentConfig, InstanceSpec, PricingSpec, RandomSpec};
pub use experiment::{
    aggregate, quantile, run_experiment, run_seed, write_aggregate_csv, write_per_seed_csv,
    AggregateRow, RegretReport, SeedRow, REPORT_SCHEMA,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config {path}: {reason}")]
    Config { path: String, reason: String },
    #[error("instance: {0}")]
    Instance(#[from] ModelError),
    #[error("pricing instance: {0}")]
    Pricing(#[from] ReductionError),
    #[error("environment: {0}")]
    Env(#[from] EnvError),
    #[error("policy: {0}")]
    Policy(#[from] PolicyError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}
