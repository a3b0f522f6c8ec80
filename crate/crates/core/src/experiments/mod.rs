//! Parameter sweeps, trace ingestion, overhead fitting and trace comparison
//! built on the simulator and the calculus engine.

mod compare;
mod fit;
mod naming;
mod region;
mod sweep;
mod trace;

pub use compare::{
    compare_traces, write_comparison_csv, Comparison, QuantileDelta, SojournSource,
    COMPARE_QUANTILES,
};
pub use fit::{fit_overhead, fit_overhead_datasets, write_fit_json, OverheadFit};
pub use naming::{artifact_name, write_sim_artifacts};
pub use region::{stability_region_curve, write_region_csv, RegionRow};
pub use sweep::{
    analytical_bound, run_sweep, write_sweep_csv, SweepParameter, SweepRow, SweepSpec,
};
pub use trace::{
    ingest_trace, read_jobs_csv, read_tasks_csv, IngestReport, Rejection, TraceDataset,
};
