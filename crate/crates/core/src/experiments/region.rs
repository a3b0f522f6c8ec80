use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::{stability_big, stability_tiny};
use crate::simulator::{max_stable_utilization, DetectionRule, Model, SystemConfig};
use crate::{Error, Result};

/// Bisection bracket on the utilization.
pub const REGION_BRACKET: (f64, f64) = (0.05, 0.99);
/// Bisection stops once the bracket is this narrow.
pub const REGION_RESOLUTION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionRow {
    pub k: usize,
    pub kappa: f64,
    pub rho_max_sim: f64,
    /// Tiny-tasks split-merge limit (1 for the fork-join models).
    pub rho_max_tiny: f64,
    /// Big-tasks split-merge limit, when `k` is a multiple of `l`.
    pub rho_max_big: Option<f64>,
}

/// Simulated maximum stable utilization per `k`, next to the analytical
/// limits. The mean job workload of `base` is kept constant across `k`.
pub fn stability_region_curve(
    base: &SystemConfig,
    k_values: &[usize],
    rule: &DetectionRule,
) -> Result<Vec<RegionRow>> {
    if k_values.is_empty() {
        return Err(Error::config("k_values", "need at least one k"));
    }
    base.validate()?;
    let workload = base.k as f64 * base.task_execution.mean();
    let mut rows = k_values
        .par_iter()
        .map(|&k| {
            let mut config = base.clone();
            config.k = k;
            config.task_execution = base.task_execution.with_mean(workload / k as f64)?;
            config.validate()?;
            let rho_max_sim =
                max_stable_utilization(&config, rule, REGION_BRACKET, REGION_RESOLUTION)?;
            let kappa = config.kappa();
            let (tiny, big) = match config.model {
                Model::SplitMerge => {
                    let big = if k.is_multiple_of(config.l) {
                        let shape = u32::try_from(k / config.l)
                            .map_err(|_| Error::config("k", "too large"))?;
                        Some(stability_big(config.l, shape, 1.0)?)
                    } else {
                        None
                    };
                    (stability_tiny(config.l, kappa), big)
                }
                _ => (1.0, None),
            };
            Ok(RegionRow {
                k,
                kappa,
                rho_max_sim,
                rho_max_tiny: tiny,
                rho_max_big: big,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|r| r.k);
    Ok(rows)
}

/// `k,kappa,rho_max_sim,rho_max_tiny,rho_max_big`.
pub fn write_region_csv<W: Write>(writer: W, rows: &[RegionRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}
