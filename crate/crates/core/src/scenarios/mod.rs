//! Initial data and the experiments built on them.

pub mod data;
pub mod experiments;
pub mod report;
pub mod studies;

pub use data::InitialData;
pub use experiments::{
    peak_position, run_compact_support, run_experiment, run_fast_decay, run_optimal_tail, run_peakon_validation,
    run_persistence, run_unique_continuation,
};
pub use report::{ExperimentReport, SeriesRow, Status, Verdict, CRITERIA};
