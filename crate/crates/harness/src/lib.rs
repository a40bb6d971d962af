//! Monte-Carlo harness for shrinkage covariance estimators: JSON experiment
//! configs, method registry, metric aggregation and CSV output.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod csv_io;
pub mod error;
pub mod experiments;
pub mod methods;
pub mod metrics;
pub mod selfcheck;

pub use config::{ExperimentConfig, ExperimentKind};
pub use csv_io::ResultRow;
pub use error::{HarnessError, Result};
pub use experiments::{run_experiment, run_experiment_with, Execution};
