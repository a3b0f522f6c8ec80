use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Default number of evaluation points of [`pp_plot`].
pub const DEFAULT_PP_GRID: usize = 512;

/// A finalized sample of durations, sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalSample {
    values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxplotSummary {
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
    pub mean: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct ValueRow {
    value_ms: f64,
}

impl EmpiricalSample {
    /// NaN values are rejected.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidArgument("sample contains NaN".into()));
        }
        values.sort_by(f64::total_cmp);
        Ok(EmpiricalSample { values })
    }

    pub fn count(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn non_empty(&self) -> Result<&[f64]> {
        if self.values.is_empty() {
            Err(Error::EmptySample)
        } else {
            Ok(&self.values)
        }
    }

    /// Type-1 (inverse CDF) estimator: the order statistic at 1-based index
    /// `ceil(q * n)`. `q = 0` yields the minimum.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        let v = self.non_empty()?;
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::InvalidArgument(format!(
                "quantile level {q} not in (0, 1]"
            )));
        }
        let n = v.len();
        let rank = (q * n as f64).ceil() as usize;
        Ok(v[rank.clamp(1, n) - 1])
    }

    /// Fraction of values `<= t`.
    pub fn ecdf(&self, t: f64) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        let below = self.values.partition_point(|&v| v <= t);
        below as f64 / self.values.len() as f64
    }

    /// Fraction of values strictly above `t`.
    pub fn exceedance(&self, t: f64) -> f64 {
        1.0 - self.ecdf(t)
    }

    pub fn mean(&self) -> Result<f64> {
        let v = self.non_empty()?;
        Ok(v.iter().sum::<f64>() / v.len() as f64)
    }

    pub fn boxplot_summary(&self) -> Result<BoxplotSummary> {
        let v = self.non_empty()?;
        Ok(BoxplotSummary {
            min: v[0],
            q25: self.quantile(0.25)?,
            median: self.quantile(0.5)?,
            q75: self.quantile(0.75)?,
            max: v[v.len() - 1],
            mean: self.mean()?,
        })
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for &value_ms in &self.values {
            w.serialize(ValueRow { value_ms })?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let values = r
            .deserialize::<ValueRow>()
            .map(|row| row.map(|r| r.value_ms))
            .collect::<Result<Vec<_>, _>>()?;
        EmpiricalSample::new(values)
    }
}

/// PP-plot points `(F_a(t), F_b(t))` for `grid_size` evaluation points `t`
/// placed at the quantiles of the pooled sample, from its minimum to its
/// maximum. Both coordinates are nondecreasing along the returned list.
pub fn pp_plot(
    a: &EmpiricalSample,
    b: &EmpiricalSample,
    grid_size: usize,
) -> Result<Vec<(f64, f64)>> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    if grid_size < 2 {
        return Err(Error::InvalidArgument(format!(
            "grid_size must be >= 2, got {grid_size}"
        )));
    }
    let mut pooled = Vec::with_capacity(a.count() + b.count());
    pooled.extend_from_slice(a.values());
    pooled.extend_from_slice(b.values());
    let pooled = EmpiricalSample::new(pooled)?;
    (0..grid_size)
        .map(|j| {
            let q = j as f64 / (grid_size - 1) as f64;
            let t = pooled.quantile(q)?;
            Ok((a.ecdf(t), b.ecdf(t)))
        })
        .collect()
}
