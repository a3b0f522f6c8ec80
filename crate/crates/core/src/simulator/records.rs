use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::config::SystemConfig;
use super::stability::{classify, DetectionRule};
use crate::stochastic::EmpiricalSample;
use crate::Result;

/// Jobs excluded from quantile statistics by default.
pub const DEFAULT_WARMUP_JOBS: usize = 1_000;

/// Quantile levels reported in simulation summaries.
pub const SUMMARY_QUANTILES: [f64; 3] = [0.5, 0.9, 0.99];

/// One task of one job. Indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskRecord {
    #[serde(rename = "job")]
    pub job_index: u64,
    #[serde(rename = "task")]
    pub task_index: u32,
    #[serde(rename = "start_ms")]
    pub start: f64,
    #[serde(rename = "exec_ms")]
    pub execution: f64,
    #[serde(rename = "overhead_ms")]
    pub overhead: f64,
    /// `execution + overhead`; the time the worker is occupied.
    #[serde(rename = "service_ms")]
    pub service: f64,
    #[serde(rename = "finish_ms")]
    pub finish: f64,
}

/// One job. `index` is 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JobRecord {
    #[serde(rename = "job")]
    pub index: u64,
    #[serde(rename = "arrival_ms")]
    pub arrival: f64,
    #[serde(rename = "first_start_ms")]
    pub first_start: f64,
    #[serde(rename = "last_finish_ms")]
    pub last_task_finish: f64,
    /// Departure including pre-departure overhead.
    #[serde(rename = "departure_ms")]
    pub departure: f64,
    #[serde(rename = "sojourn_ms")]
    pub sojourn: f64,
    /// Time from arrival until the first task starts.
    #[serde(rename = "waiting_ms")]
    pub waiting: f64,
    /// Sum of the task service times.
    #[serde(rename = "workload_ms")]
    pub workload: f64,
    /// Time from the first task start to the last task finish.
    #[serde(rename = "service_ms")]
    pub job_service: f64,
}

impl JobRecord {
    /// Delay between the last task finishing and the job departing.
    pub fn pre_departure_delay(&self) -> f64 {
        self.departure - self.last_task_finish
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub config: SystemConfig,
    pub jobs: Vec<JobRecord>,
    pub tasks: Option<Vec<TaskRecord>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSummary {
    pub config: SystemConfig,
    pub warmup_jobs: usize,
    pub measured_jobs: usize,
    pub quantiles: BTreeMap<String, f64>,
    pub mean_sojourn: f64,
    pub mean_waiting: f64,
    pub stable: bool,
}

impl SimResult {
    /// Jobs after the first `warmup` ones. Falls back to all jobs when the run
    /// is not longer than the warm-up.
    pub fn measured_jobs(&self, warmup: usize) -> &[JobRecord] {
        if self.jobs.len() > warmup {
            &self.jobs[warmup..]
        } else {
            &self.jobs
        }
    }

    pub fn sojourn_sample(&self, warmup: usize) -> Result<EmpiricalSample> {
        EmpiricalSample::new(
            self.measured_jobs(warmup)
                .iter()
                .map(|j| j.sojourn)
                .collect(),
        )
    }

    pub fn waiting_sample(&self, warmup: usize) -> Result<EmpiricalSample> {
        EmpiricalSample::new(
            self.measured_jobs(warmup)
                .iter()
                .map(|j| j.waiting)
                .collect(),
        )
    }

    pub fn mean_job_service(&self, warmup: usize) -> f64 {
        let jobs = self.measured_jobs(warmup);
        jobs.iter().map(|j| j.job_service).sum::<f64>() / jobs.len() as f64
    }

    pub fn summary(&self, warmup: usize) -> Result<SimSummary> {
        let sojourn = self.sojourn_sample(warmup)?;
        let waiting = self.waiting_sample(warmup)?;
        let quantiles = SUMMARY_QUANTILES
            .iter()
            .map(|&q| Ok((q.to_string(), sojourn.quantile(q)?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        Ok(SimSummary {
            config: self.config.clone(),
            warmup_jobs: self.jobs.len() - self.measured_jobs(warmup).len(),
            measured_jobs: sojourn.count(),
            quantiles,
            mean_sojourn: sojourn.mean()?,
            mean_waiting: waiting.mean()?,
            stable: classify(self, &DetectionRule::default()).stable,
        })
    }
}
