use std::collections::HashMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::trace::TraceDataset;
use crate::simulator::{JobRecord, OverheadParams, TaskRecord};
use crate::stochastic::{BoxplotSummary, EmpiricalSample};
use crate::{Error, Result};

/// Quantile of the task overheads used as the constant part.
const CONSTANT_QUANTILE: f64 = 0.01;

/// Two-class overhead model fitted to measured tasks and jobs. Times in ms,
/// `mu_ts_task` per ms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverheadFit {
    pub c_ts_task: f64,
    pub mu_ts_task: f64,
    pub c_pd_job: f64,
    pub c_pd_task: f64,
    /// Task overheads above the fitted constant.
    pub residual_stats: BoxplotSummary,
    pub n_tasks: usize,
    pub n_jobs: usize,
    pub distinct_k: usize,
    /// Set when the jobs cover a single `k`, so that `c_pd_task` could not be
    /// separated from `c_pd_job` and was set to zero.
    pub single_k_warning: bool,
}

impl OverheadFit {
    pub fn params(&self) -> OverheadParams {
        OverheadParams {
            c_ts_task: self.c_ts_task,
            mu_ts_task: self.mu_ts_task,
            c_pd_job: self.c_pd_job,
            c_pd_task: self.c_pd_task,
        }
    }
}

/// `(k, pre-departure delay)` for every job that has tasks.
fn delays(tasks: &[TaskRecord], jobs: &[JobRecord]) -> Vec<(f64, f64)> {
    let mut counts: HashMap<u64, usize> = HashMap::new();
    for t in tasks {
        *counts.entry(t.job_index).or_insert(0) += 1;
    }
    jobs.iter()
        .filter_map(|j| {
            counts
                .get(&j.index)
                .map(|&k| (k as f64, j.pre_departure_delay().max(0.0)))
        })
        .collect()
}

fn fit(overheads: Vec<f64>, points: Vec<(f64, f64)>) -> Result<OverheadFit> {
    let n_tasks = overheads.len();
    let sample = EmpiricalSample::new(overheads)?;
    let c = sample.quantile(CONSTANT_QUANTILE)?.max(0.0);
    let residuals =
        EmpiricalSample::new(sample.values().iter().map(|o| (o - c).max(0.0)).collect())?;
    let mean_residual = residuals.mean()?;
    let mu = if mean_residual > 0.0 {
        1.0 / mean_residual
    } else {
        0.0
    };

    if points.is_empty() {
        return Err(Error::EmptySample);
    }
    let n = points.len() as f64;
    let mean_k = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_d = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_k).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_k) * (p.1 - mean_d)).sum();
    let mut distinct: Vec<f64> = points.iter().map(|p| p.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let single_k = distinct.len() < 2;
    let (intercept, slope) = if single_k {
        log::warn!(
            "all jobs have k = {}; per-task pre-departure overhead set to 0",
            distinct[0]
        );
        (mean_d, 0.0)
    } else {
        let slope = sxy / sxx;
        (mean_d - slope * mean_k, slope)
    };
    Ok(OverheadFit {
        c_ts_task: c,
        mu_ts_task: mu,
        c_pd_job: intercept.max(0.0),
        c_pd_task: slope.max(0.0),
        residual_stats: residuals.boxplot_summary()?,
        n_tasks,
        n_jobs: points.len(),
        distinct_k: distinct.len(),
        single_k_warning: single_k,
    })
}

/// Fits the overhead model to one trace: the task constant is the 1st
/// percentile of the task overheads, the exponential rate the inverse mean
/// excess over it, and the pre-departure terms are the least-squares
/// intercept and slope of the per-job delay against `k`.
pub fn fit_overhead(tasks: &[TaskRecord], jobs: &[JobRecord]) -> Result<OverheadFit> {
    fit(
        tasks.iter().map(|t| t.overhead).collect(),
        delays(tasks, jobs),
    )
}

/// As [`fit_overhead`], pooling several traces (typically runs at different
/// `k`). Job indices only need to be unique within each trace.
pub fn fit_overhead_datasets(datasets: &[TraceDataset]) -> Result<OverheadFit> {
    let overheads = datasets
        .iter()
        .flat_map(|d| d.tasks.iter().map(|t| t.overhead))
        .collect();
    let points = datasets
        .iter()
        .flat_map(|d| delays(&d.tasks, &d.jobs))
        .collect();
    fit(overheads, points)
}

pub fn write_fit_json<W: Write>(writer: W, fit: &OverheadFit) -> Result<()> {
    serde_json::to_writer_pretty(writer, fit)?;
    Ok(())
}
