use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::stochastic::Distribution;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    SplitMerge,
    SingleQueueForkJoin,
    ConventionalForkJoin,
}

impl Model {
    pub fn short_name(&self) -> &'static str {
        match self {
            Model::SplitMerge => "sm",
            Model::SingleQueueForkJoin => "sqfj",
            Model::ConventionalForkJoin => "cfj",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sm" | "split-merge" | "splitmerge" | "split_merge" => Ok(Model::SplitMerge),
            "sqfj" | "fj" | "single-queue-fork-join" | "single_queue_fork_join" => {
                Ok(Model::SingleQueueForkJoin)
            }
            "cfj" | "fork-join" | "conventional-fork-join" | "conventional_fork_join" => {
                Ok(Model::ConventionalForkJoin)
            }
            other => Err(Error::config(
                "model",
                format!("unknown model `{other}` (sm, sqfj, cfj)"),
            )),
        }
    }
}

/// Four-parameter scheduling overhead model, in milliseconds.
///
/// Every task occupies its worker for an extra `c_ts_task + Exp(mu_ts_task)`;
/// every job departs `c_pd_job + k * c_pd_task` after its last task finished.
/// `mu_ts_task = 0` disables the exponential component.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct OverheadParams {
    pub c_ts_task: f64,
    pub mu_ts_task: f64,
    pub c_pd_job: f64,
    pub c_pd_task: f64,
}

impl OverheadParams {
    pub const fn zero() -> Self {
        OverheadParams {
            c_ts_task: 0.0,
            mu_ts_task: 0.0,
            c_pd_job: 0.0,
            c_pd_task: 0.0,
        }
    }

    /// Values measured on the Spark cluster: 2.6 ms, 2000 s⁻¹, 20 ms and
    /// 7.4e-3 ms.
    pub const fn paper() -> Self {
        OverheadParams {
            c_ts_task: 2.6,
            mu_ts_task: 2.0,
            c_pd_job: 20.0,
            c_pd_task: 7.4e-3,
        }
    }

    pub fn is_zero(&self) -> bool {
        *self == OverheadParams::zero()
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("overhead.c_ts_task", self.c_ts_task),
            ("overhead.mu_ts_task", self.mu_ts_task),
            ("overhead.c_pd_job", self.c_pd_job),
            ("overhead.c_pd_task", self.c_pd_task),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::config(
                    name,
                    format!("must be finite and >= 0, got {v}"),
                ));
            }
        }
        Ok(())
    }

    /// Mean task-service overhead `c + 1/mu`.
    pub fn task_mean(&self) -> f64 {
        if self.mu_ts_task > 0.0 {
            self.c_ts_task + 1.0 / self.mu_ts_task
        } else {
            self.c_ts_task
        }
    }

    /// Pre-departure delay of a job with `k` tasks.
    pub fn pre_departure(&self, k: usize) -> f64 {
        self.c_pd_job + k as f64 * self.c_pd_task
    }

    pub(crate) fn task_law(&self) -> Option<Distribution> {
        (self.mu_ts_task > 0.0).then_some(Distribution::ShiftedExponential {
            shift: self.c_ts_task,
            rate: self.mu_ts_task,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub model: Model,
    /// Number of workers.
    pub l: usize,
    /// Tasks per job.
    pub k: usize,
    /// Inter-arrival law.
    pub arrival: Distribution,
    /// Task execution law, excluding overhead.
    pub task_execution: Distribution,
    #[serde(default)]
    pub overhead: OverheadParams,
    pub n_jobs: usize,
    pub seed: u64,
    #[serde(default)]
    pub in_sequence_departures: bool,
    /// Keep per-task records in the result.
    #[serde(default)]
    pub record_tasks: bool,
}

impl SystemConfig {
    /// Overhead-free configuration with exponential arrivals and tasks.
    pub fn new(
        model: Model,
        l: usize,
        k: usize,
        arrival: Distribution,
        task_execution: Distribution,
    ) -> Self {
        SystemConfig {
            model,
            l,
            k,
            arrival,
            task_execution,
            overhead: OverheadParams::zero(),
            n_jobs: 1,
            seed: 0,
            in_sequence_departures: false,
            record_tasks: false,
        }
    }

    pub fn with_jobs(mut self, n_jobs: usize) -> Self {
        self.n_jobs = n_jobs;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_overhead(mut self, overhead: OverheadParams) -> Self {
        self.overhead = overhead;
        self
    }

    pub fn with_in_sequence(mut self, on: bool) -> Self {
        self.in_sequence_departures = on;
        self
    }

    pub fn with_tasks_recorded(mut self, on: bool) -> Self {
        self.record_tasks = on;
        self
    }

    /// Tinyfication factor `k / l`.
    pub fn kappa(&self) -> f64 {
        self.k as f64 / self.l as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.l == 0 {
            return Err(Error::config("l", "l must be >= 1"));
        }
        if self.k == 0 {
            return Err(Error::config("k", "k must be >= 1"));
        }
        match self.model {
            Model::SplitMerge | Model::SingleQueueForkJoin if self.k < self.l => {
                return Err(Error::config(
                    "k",
                    format!("k must be ≥ l (k = {}, l = {})", self.k, self.l),
                ));
            }
            Model::ConventionalForkJoin if self.k != self.l => {
                return Err(Error::config(
                    "k",
                    format!(
                        "k must equal l for conventional fork-join (k = {}, l = {})",
                        self.k, self.l
                    ),
                ));
            }
            _ => {}
        }
        if self.k >= 1 << 24 {
            return Err(Error::config("k", "k must be < 2^24"));
        }
        if self.n_jobs == 0 {
            return Err(Error::config("n_jobs", "n_jobs must be >= 1"));
        }
        if self.n_jobs > u32::MAX as usize {
            return Err(Error::config("n_jobs", "n_jobs must fit in 32 bits"));
        }
        self.arrival
            .validate()
            .map_err(|e| Error::config("arrival", e.to_string()))?;
        self.task_execution
            .validate()
            .map_err(|e| Error::config("task_execution", e.to_string()))?;
        self.overhead.validate()
    }
}
