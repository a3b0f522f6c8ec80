use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::SystemConfig;
use super::engine::run;
use super::records::SimResult;
use crate::stochastic::Distribution;
use crate::{Error, Result};

/// Trend-based instability detection.
///
/// A run is unstable when the mean waiting time over the last decile of jobs
/// exceeds `growth_ratio` times that over the fourth decile, or when more than
/// `backlog_per_worker * l` jobs are still in the system when the last job
/// arrives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionRule {
    pub n_jobs: usize,
    pub growth_ratio: f64,
    pub backlog_per_worker: usize,
}

impl Default for DetectionRule {
    fn default() -> Self {
        DetectionRule {
            n_jobs: 50_000,
            growth_ratio: 2.0,
            backlog_per_worker: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub stable: bool,
    pub fourth_decile_waiting: f64,
    pub last_decile_waiting: f64,
    pub final_backlog: usize,
}

/// Per-server utilization `λ κ E[E_i]` of a configuration. Overhead is not
/// counted as work.
pub fn utilization(config: &SystemConfig) -> f64 {
    config.kappa() * config.task_execution.mean() / config.arrival.mean()
}

/// Inter-arrival law of the same family as `config.arrival` that yields
/// utilization `rho`.
pub fn arrival_for_utilization(config: &SystemConfig, rho: f64) -> Result<Distribution> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "utilization must be > 0, got {rho}"
        )));
    }
    config
        .arrival
        .with_mean(config.kappa() * config.task_execution.mean() / rho)
}

pub fn classify(result: &SimResult, rule: &DetectionRule) -> StabilityVerdict {
    let jobs = &result.jobs;
    let n = jobs.len();
    let mean_waiting = |from: usize, to: usize| {
        let slice = &jobs[from.min(n)..to.min(n)];
        if slice.is_empty() {
            0.0
        } else {
            slice.iter().map(|j| j.waiting).sum::<f64>() / slice.len() as f64
        }
    };
    let fourth = mean_waiting(3 * n / 10, 4 * n / 10);
    let last = mean_waiting(9 * n / 10, n);
    let final_backlog = match jobs.last() {
        Some(last_job) => jobs[..n - 1]
            .iter()
            .filter(|j| j.departure > last_job.arrival)
            .count(),
        None => 0,
    };
    let growing = last > rule.growth_ratio * fourth;
    let backlogged = final_backlog > rule.backlog_per_worker * result.config.l;
    StabilityVerdict {
        stable: !(growing || backlogged),
        fourth_decile_waiting: fourth,
        last_decile_waiting: last,
        final_backlog,
    }
}

fn probe(base: &SystemConfig, rho: f64, rule: &DetectionRule) -> Result<StabilityVerdict> {
    let mut config = base.clone();
    config.arrival = arrival_for_utilization(base, rho)?;
    config.n_jobs = rule.n_jobs;
    config.record_tasks = false;
    Ok(classify(&run(&config)?, rule))
}

/// Stable prefix / unstable suffix closest (in Hamming distance) to `flags`.
/// Ties prefer the shorter stable prefix.
pub fn isotonic_cleanup(flags: &[bool]) -> Vec<bool> {
    let n = flags.len();
    // errors(c) = unstable flags in [0, c) + stable flags in [c, n)
    let mut errors = flags.iter().filter(|&&s| s).count();
    let (mut best, mut best_cut) = (errors, 0);
    for (c, &stable) in flags.iter().enumerate() {
        if stable {
            errors -= 1;
        } else {
            errors += 1;
        }
        if errors < best {
            best = errors;
            best_cut = c + 1;
        }
    }
    (0..n).map(|i| i < best_cut).collect()
}

/// Classifies each utilization of the grid (sorted ascending) by simulation.
pub fn stability_scan(
    base: &SystemConfig,
    utilization_grid: &[f64],
    rule: &DetectionRule,
) -> Result<Vec<(f64, bool)>> {
    if utilization_grid.is_empty() {
        return Err(Error::InvalidArgument("utilization grid is empty".into()));
    }
    base.validate()?;
    let mut grid = utilization_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    let raw = grid
        .par_iter()
        .map(|&rho| probe(base, rho, rule).map(|v| v.stable))
        .collect::<Result<Vec<_>>>()?;
    Ok(grid.into_iter().zip(isotonic_cleanup(&raw)).collect())
}

/// Largest stable utilization, found by bisection on `bracket` until the
/// bracket is no wider than `resolution`. Returns the bracket midpoint.
pub fn max_stable_utilization(
    base: &SystemConfig,
    rule: &DetectionRule,
    bracket: (f64, f64),
    resolution: f64,
) -> Result<f64> {
    base.validate()?;
    let (mut lo, mut hi) = bracket;
    if !(0.0 < lo && lo < hi) || resolution <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "bad bisection bracket {bracket:?} / resolution {resolution}"
        )));
    }
    while hi - lo > resolution {
        let mid = 0.5 * (lo + hi);
        let verdict = probe(base, mid, rule)?;
        log::debug!("rho {mid:.4}: {verdict:?}");
        if verdict.stable {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
