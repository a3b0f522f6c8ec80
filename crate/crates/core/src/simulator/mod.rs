//! Discrete-event simulation of split-merge, single-queue fork-join and
//! conventional fork-join systems with `k` tasks per job over `l` workers.

mod config;
mod engine;
mod export;
mod records;
mod stability;

pub use config::{Model, OverheadParams, SystemConfig};
pub use engine::run;
pub use export::{write_jobs_csv, write_tasks_csv, JOBS_HEADER, TASKS_HEADER};
pub use records::{
    JobRecord, SimResult, SimSummary, TaskRecord, DEFAULT_WARMUP_JOBS, SUMMARY_QUANTILES,
};
pub use stability::{
    arrival_for_utilization, classify, isotonic_cleanup, max_stable_utilization, stability_scan,
    utilization, DetectionRule, StabilityVerdict,
};
