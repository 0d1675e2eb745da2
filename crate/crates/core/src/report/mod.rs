// SPDX-License-Identifier: MIT OR Apache-2.0

//! Run configuration, rubric levels, the comparison table, and the pipeline
//! that produces them.

pub mod config;
pub mod pipeline;
pub mod rubric;
pub mod table;

pub use config::{ExplainerGrid, RunConfig};
pub use pipeline::{run, run_prove, run_score, run_table, RunOutput};
pub use rubric::{map_rubric, RubricThresholds};
pub use table::{Cell, ComparisonTable};
