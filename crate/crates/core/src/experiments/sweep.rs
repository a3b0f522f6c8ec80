use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::{
    approx_sojourn_fj_overhead, approx_sojourn_sm_overhead, bound_forkjoin_conventional,
    BoundResult, Metric, ModelParams,
};
use crate::simulator::{classify, run, DetectionRule, Model, SystemConfig, SUMMARY_QUANTILES};
use crate::stochastic::Distribution;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParameter {
    K,
    Lambda,
    L,
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParameter::K => "k",
            SweepParameter::Lambda => "lambda",
            SweepParameter::L => "l",
        })
    }
}

impl FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "k" => Ok(SweepParameter::K),
            "lambda" => Ok(SweepParameter::Lambda),
            "l" => Ok(SweepParameter::L),
            other => Err(Error::InvalidArgument(format!(
                "cannot sweep {other:?}, expected k, lambda or l"
            ))),
        }
    }
}

/// A one-dimensional sweep around `base`.
///
/// Lambda values are arrival rates per millisecond. When sweeping `k`, the
/// mean job workload `k · E[exec]` of `base` is kept constant by rescaling the
/// task execution law, unless `pin_mu` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub base: SystemConfig,
    pub vary: SweepParameter,
    pub values: Vec<f64>,
    pub epsilon_list: Vec<f64>,
    pub compare_analytical: bool,
    #[serde(default)]
    pub pin_mu: bool,
    pub warmup: usize,
}

impl SweepSpec {
    pub fn new(base: SystemConfig, vary: SweepParameter, values: Vec<f64>) -> Self {
        SweepSpec {
            base,
            vary,
            values,
            epsilon_list: vec![0.01],
            compare_analytical: true,
            pin_mu: false,
            warmup: crate::simulator::DEFAULT_WARMUP_JOBS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::config("values", "sweep needs at least one value"));
        }
        if let Some(e) = self.epsilon_list.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
            return Err(Error::config(
                "epsilon",
                format!("must be in (0, 1), got {e}"),
            ));
        }
        self.base.validate()
    }

    /// Configuration of the row for `value`.
    pub fn config_for(&self, value: f64) -> Result<SystemConfig> {
        let mut c = self.base.clone();
        match self.vary {
            SweepParameter::K => {
                let k = as_count("k", value)?;
                if !self.pin_mu {
                    let workload = self.base.k as f64 * self.base.task_execution.mean();
                    c.task_execution = c.task_execution.with_mean(workload / k as f64)?;
                }
                c.k = k;
            }
            SweepParameter::L => {
                c.l = as_count("l", value)?;
                if c.model == Model::ConventionalForkJoin {
                    c.k = c.l;
                }
            }
            SweepParameter::Lambda => {
                if !(value > 0.0 && value.is_finite()) {
                    return Err(Error::config("lambda", format!("must be > 0, got {value}")));
                }
                c.arrival = c.arrival.with_mean(1.0 / value)?;
            }
        }
        c.validate()?;
        Ok(c)
    }
}

fn as_count(field: &'static str, value: f64) -> Result<usize> {
    if value >= 1.0 && value.fract() == 0.0 && value < 1e9 {
        Ok(value as usize)
    } else {
        Err(Error::config(
            field,
            format!("must be a positive integer, got {value}"),
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub l: usize,
    pub k: usize,
    /// Arrival rate per millisecond.
    pub lambda: f64,
    /// Task execution rate per millisecond.
    pub mu: f64,
    pub stable: bool,
    /// Simulated sojourn quantiles keyed by level: the summary levels plus
    /// `1 - ε` for each requested `ε`.
    pub sim_quantiles: BTreeMap<String, f64>,
    /// Per `ε`: analytical `τ_ε` (ms) and the simulated `P[T > τ_ε]`.
    pub analytical: Vec<AnalyticalPoint>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticalPoint {
    pub epsilon: f64,
    pub bound: Option<BoundResult>,
    pub sim_exceedance: Option<f64>,
}

/// Analytical sojourn quantile for `config` at level `1 - epsilon`: the
/// overhead approximations for split-merge and single-queue fork-join, the
/// union bound for conventional fork-join. `None` when the configuration is
/// outside the analytical models (non-exponential laws, conventional
/// fork-join with overhead).
pub fn analytical_bound(config: &SystemConfig, epsilon: f64) -> Result<Option<BoundResult>> {
    let (Distribution::Exponential { rate: lambda }, Distribution::Exponential { rate: mu }) =
        (config.arrival, config.task_execution)
    else {
        return Ok(None);
    };
    let params = ModelParams::new(config.l, config.k, lambda, mu)?.with_overhead(config.overhead);
    let r = match config.model {
        Model::SplitMerge => approx_sojourn_sm_overhead(&params, epsilon)?,
        Model::SingleQueueForkJoin => approx_sojourn_fj_overhead(&params, epsilon)?,
        Model::ConventionalForkJoin if config.overhead.is_zero() => {
            bound_forkjoin_conventional(&params, epsilon, Metric::Sojourn)?
        }
        Model::ConventionalForkJoin => return Ok(None),
    };
    Ok(Some(BoundResult {
        approximation: r.approximation && !config.overhead.is_zero(),
        ..r
    }))
}

fn rate_of(d: &Distribution) -> f64 {
    1.0 / d.mean()
}

fn sweep_row(spec: &SweepSpec, value: f64) -> Result<SweepRow> {
    let config = spec.config_for(value)?;
    let result = run(&config)?;
    let stable = classify(&result, &DetectionRule::default()).stable;
    let sample = result.sojourn_sample(spec.warmup)?;
    let mut sim_quantiles = BTreeMap::new();
    let levels = SUMMARY_QUANTILES
        .iter()
        .copied()
        .chain(spec.epsilon_list.iter().map(|e| 1.0 - e));
    for q in levels {
        sim_quantiles.insert(q.to_string(), sample.quantile(q)?);
    }
    let mut analytical = Vec::new();
    if spec.compare_analytical {
        for &epsilon in &spec.epsilon_list {
            let bound = analytical_bound(&config, epsilon)?;
            let sim_exceedance = bound.and_then(|b| b.tau).map(|t| sample.exceedance(t));
            analytical.push(AnalyticalPoint {
                epsilon,
                bound,
                sim_exceedance,
            });
        }
    }
    Ok(SweepRow {
        value,
        l: config.l,
        k: config.k,
        lambda: rate_of(&config.arrival),
        mu: rate_of(&config.task_execution),
        stable,
        sim_quantiles,
        analytical,
        error: None,
    })
}

/// Runs every row of the sweep, in parallel. A failing row is reported with
/// its error message instead of aborting the sweep.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let rows = spec
        .values
        .par_iter()
        .map(|&value| {
            sweep_row(spec, value).unwrap_or_else(|e| {
                log::warn!("sweep row {}={value} failed: {e}", spec.vary);
                SweepRow {
                    value,
                    l: spec.base.l,
                    k: spec.base.k,
                    lambda: f64::NAN,
                    mu: f64::NAN,
                    stable: false,
                    sim_quantiles: BTreeMap::new(),
                    analytical: Vec::new(),
                    error: Some(e.to_string()),
                }
            })
        })
        .collect();
    Ok(rows)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Flat CSV: one line per row with the row's `l`, `k` and rates, then `sim_q{level}_ms` columns and, for each
/// `ε`, `tau_eps{ε}_ms`, `feasible_eps{ε}` and `exceed_eps{ε}`.
pub fn write_sweep_csv<W: Write>(writer: W, spec: &SweepSpec, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut levels: Vec<String> = SUMMARY_QUANTILES.iter().map(|q| q.to_string()).collect();
    for e in &spec.epsilon_list {
        let q = (1.0 - e).to_string();
        if !levels.contains(&q) {
            levels.push(q);
        }
    }
    let mut header = vec![
        "l".to_string(),
        "k".into(),
        "lambda_per_ms".into(),
        "mu_per_ms".into(),
        "stable".into(),
    ];
    header.extend(levels.iter().map(|q| format!("sim_q{q}_ms")));
    if spec.compare_analytical {
        for e in &spec.epsilon_list {
            header.push(format!("tau_eps{e}_ms"));
            header.push(format!("feasible_eps{e}"));
            header.push(format!("exceed_eps{e}"));
        }
    }
    header.push("error".into());
    w.write_record(&header)?;

    for row in rows {
        let mut rec = vec![
            row.l.to_string(),
            row.k.to_string(),
            row.lambda.to_string(),
            row.mu.to_string(),
            row.stable.to_string(),
        ];
        rec.extend(
            levels
                .iter()
                .map(|q| opt(row.sim_quantiles.get(q).copied())),
        );
        if spec.compare_analytical {
            for e in &spec.epsilon_list {
                let point = row.analytical.iter().find(|p| p.epsilon == *e);
                let bound = point.and_then(|p| p.bound);
                rec.push(opt(bound.and_then(|b| b.tau)));
                rec.push(bound.map(|b| b.feasible.to_string()).unwrap_or_default());
                rec.push(opt(point.and_then(|p| p.sim_exceedance)));
            }
        }
        rec.push(row.error.clone().unwrap_or_default());
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> SystemConfig {
        SystemConfig::new(
            Model::SingleQueueForkJoin,
            10,
            10,
            Distribution::exponential(0.5e-3).unwrap(),
            Distribution::exponential(1e-3).unwrap(),
        )
        .with_jobs(3000)
    }

    #[test]
    fn k_sweep_keeps_workload_constant() {
        let spec = SweepSpec::new(base(), SweepParameter::K, vec![10.0, 40.0]);
        let c = spec.config_for(40.0).unwrap();
        assert_eq!(c.k, 40);
        assert!((c.task_execution.mean() - 250.0).abs() < 1e-9);
        let pinned = SweepSpec {
            pin_mu: true,
            ..spec.clone()
        };
        assert_eq!(
            pinned.config_for(40.0).unwrap().task_execution.mean(),
            1000.0
        );
        assert!(spec.config_for(2.5).is_err());
    }

    #[test]
    fn failed_rows_do_not_abort() {
        let spec = SweepSpec::new(base(), SweepParameter::K, vec![5.0, 20.0]);
        let rows = run_sweep(&spec).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows[0].error.as_deref().unwrap().contains("k must be ≥ l"));
        assert!(rows[1].error.is_none());
        assert_eq!(rows[1].analytical.len(), 1);
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &spec, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let header = text.lines().next().unwrap();
        assert_eq!(
            header,
            "l,k,lambda_per_ms,mu_per_ms,stable,sim_q0.5_ms,sim_q0.9_ms,sim_q0.99_ms,\
             tau_eps0.01_ms,feasible_eps0.01,exceed_eps0.01,error"
        );
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn lambda_sweep_sets_arrival_rate() {
        let spec = SweepSpec::new(base(), SweepParameter::Lambda, vec![2e-4]);
        let c = spec.config_for(2e-4).unwrap();
        assert!((c.arrival.mean() - 5000.0).abs() < 1e-9);
        assert!(SweepSpec::new(base(), SweepParameter::K, vec![])
            .validate()
            .is_err());
    }

    #[test]
    fn analytical_needs_exponential_laws() {
        let mut c = base();
        c.task_execution = Distribution::deterministic(1.0).unwrap();
        assert!(analytical_bound(&c, 0.01).unwrap().is_none());
        let r = analytical_bound(&base(), 0.01).unwrap().unwrap();
        assert!(r.feasible && !r.approximation);
    }
}
