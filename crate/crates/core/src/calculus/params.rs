use serde::{Deserialize, Serialize};

use crate::simulator::OverheadParams;
use crate::{Error, Result};

/// Parameters of a parallel system with exponential arrivals (rate `lambda`)
/// and `k` exponential tasks (rate `mu`) per job over `l` workers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub l: usize,
    pub k: usize,
    pub lambda: f64,
    pub mu: f64,
    #[serde(default)]
    pub overhead: Option<OverheadParams>,
}

impl ModelParams {
    pub fn new(l: usize, k: usize, lambda: f64, mu: f64) -> Result<Self> {
        let p = ModelParams {
            l,
            k,
            lambda,
            mu,
            overhead: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_overhead(mut self, overhead: OverheadParams) -> Self {
        self.overhead = Some(overhead);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.l == 0 {
            return Err(Error::config("l", "l must be >= 1"));
        }
        if self.k < self.l {
            return Err(Error::config(
                "k",
                format!("k must be ≥ l (k = {}, l = {})", self.k, self.l),
            ));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::config(
                "lambda",
                format!("must be > 0, got {}", self.lambda),
            ));
        }
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::config("mu", format!("must be > 0, got {}", self.mu)));
        }
        if let Some(o) = &self.overhead {
            o.validate()?;
        }
        Ok(())
    }

    pub fn kappa(&self) -> f64 {
        self.k as f64 / self.l as f64
    }

    /// `λ κ / μ`.
    pub fn utilization(&self) -> f64 {
        self.lambda * self.kappa() / self.mu
    }

    pub(crate) fn overhead_or_zero(&self) -> OverheadParams {
        self.overhead.unwrap_or_default()
    }
}
