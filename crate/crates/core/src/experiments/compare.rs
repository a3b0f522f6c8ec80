use std::io::Write;

use serde::{Deserialize, Serialize};

use super::trace::TraceDataset;
use crate::simulator::{SimResult, DEFAULT_WARMUP_JOBS};
use crate::stochastic::{pp_plot, EmpiricalSample};
use crate::{Error, Result};

/// Quantile levels of the comparison table.
pub const COMPARE_QUANTILES: [f64; 3] = [0.5, 0.9, 0.99];

/// Anything that yields a sample of job sojourn times.
pub trait SojournSource {
    fn sojourn_sample(&self) -> Result<EmpiricalSample>;
}

/// All jobs of the trace.
impl SojournSource for TraceDataset {
    fn sojourn_sample(&self) -> Result<EmpiricalSample> {
        EmpiricalSample::new(self.jobs.iter().map(|j| j.sojourn).collect())
    }
}

/// Jobs after the default warm-up.
impl SojournSource for SimResult {
    fn sojourn_sample(&self) -> Result<EmpiricalSample> {
        SimResult::sojourn_sample(self, DEFAULT_WARMUP_JOBS)
    }
}

impl SojournSource for EmpiricalSample {
    fn sojourn_sample(&self) -> Result<EmpiricalSample> {
        Ok(self.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantileDelta {
    pub quantile: f64,
    pub a_ms: f64,
    pub b_ms: f64,
    /// `b - a`.
    pub delta_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    /// `(F_a(t), F_b(t))` pairs.
    pub pp: Vec<(f64, f64)>,
    pub quantiles: Vec<QuantileDelta>,
    /// Largest `|F_a(t) - F_b(t)|` over the PP grid.
    pub max_pp_deviation: f64,
}

/// PP plot of the sojourn samples of `a` and `b` and their quantile
/// differences at the levels of [`COMPARE_QUANTILES`].
pub fn compare_traces(
    a: &dyn SojournSource,
    b: &dyn SojournSource,
    grid_size: usize,
) -> Result<Comparison> {
    let sa = a.sojourn_sample()?;
    let sb = b.sojourn_sample()?;
    if sa.is_empty() || sb.is_empty() {
        return Err(Error::EmptySample);
    }
    let pp = pp_plot(&sa, &sb, grid_size)?;
    let max_pp_deviation = pp.iter().map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let quantiles = COMPARE_QUANTILES
        .iter()
        .map(|&q| {
            let (a_ms, b_ms) = (sa.quantile(q)?, sb.quantile(q)?);
            Ok(QuantileDelta {
                quantile: q,
                a_ms,
                b_ms,
                delta_ms: b_ms - a_ms,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Comparison {
        pp,
        quantiles,
        max_pp_deviation,
    })
}

/// Writes the PP points (`a_cdf,b_cdf`) and the quantile table
/// (`quantile,a_ms,b_ms,delta_ms`).
pub fn write_comparison_csv<W1: Write, W2: Write>(
    pp_out: W1,
    quantiles_out: W2,
    c: &Comparison,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(pp_out);
    w.write_record(["a_cdf", "b_cdf"])?;
    for (x, y) in &c.pp {
        w.write_record([x.to_string(), y.to_string()])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    let mut w = csv::Writer::from_writer(quantiles_out);
    for q in &c.quantiles {
        w.serialize(q)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}
