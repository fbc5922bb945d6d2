//! Scenario-driven harness around `scatter_core`: forward simulation,
//! direct sampling, mixed-regularization inversion and quality metrics.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod artifacts;
pub mod error;
pub mod pipeline;
pub mod report;
pub mod scenario;

pub use error::{HarnessError, Result};
pub use pipeline::{run_pipeline, PipelineOutput, RunOptions};
pub use report::{Metrics, ReconReport};
pub use scenario::{Scenario, Weights};
