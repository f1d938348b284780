//! Experiment driver for `freqdyn`: orbit return sets, the two-multiple ratio
//! diagnostic, the density-gap demo and scenario runs that write CSV and SVG files.

// `!(x > 0.0)` style guards reject NaN on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiments;
pub mod output;
pub mod scenarios;

pub use config::{ExperimentConfig, Overrides, PkKind, Scenario};
pub use scenarios::{run_scenario, Outcome};

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] freqdyn::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type LabResult<T> = std::result::Result<T, LabError>;
