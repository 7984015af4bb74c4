//! Experiment configuration, orchestration and artifact writing.

mod bench;
mod config;
pub mod oracle;
mod output;
mod run;
pub mod studies;

pub use bench::{run_scaling_bench, write_scaling, ScalingResult, ScalingRow};
pub use config::{gauge, ExperimentConfig, GridSection, ModelSection, ReductionSection, Scale, ScalingSection, Stiffness, TimeSection, ToleranceSection, TrainingSection};
pub use output::{csv_bytes, write_atomic, write_csv, write_json};
pub use run::{run_experiment, write_artifacts, DriftRow, ErrorRow, RunSummary, SizeSummary, StepRow, DRIFT_HEADER, ERRORS_HEADER, STEPS_HEADER};
