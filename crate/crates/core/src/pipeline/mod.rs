//! End-to-end detector, the log-ratio + FCM reference, the `(T, b)` sweep,
//! and the run-directory layout used by the command line.

mod config;
mod run;
pub mod rundir;
mod sweep;

pub use config::{PipelineConfig, CLUSTER_STAGE, SAMPLING_STAGE, SVM_STAGE};
pub use run::{baseline_change_map, classify_intermediate, run_pipeline, Classification, PipelineOutput};
pub use sweep::{sweep, sweep_csv, SweepRow, SWEEP_HEADER};
