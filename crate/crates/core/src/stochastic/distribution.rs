use std::fmt;

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Parametric law of a nonnegative duration.
///
/// Rates are in the reciprocal of the time unit the caller works in (the
/// simulator uses milliseconds).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Distribution {
    Exponential {
        rate: f64,
    },
    Erlang {
        shape: u32,
        rate: f64,
    },
    Deterministic {
        value: f64,
    },
    /// `shift + Exp(rate)`; the task-service overhead law.
    ShiftedExponential {
        shift: f64,
        rate: f64,
    },
}

impl Distribution {
    pub fn exponential(rate: f64) -> Result<Self> {
        Distribution::Exponential { rate }.validated()
    }

    pub fn erlang(shape: u32, rate: f64) -> Result<Self> {
        Distribution::Erlang { shape, rate }.validated()
    }

    pub fn deterministic(value: f64) -> Result<Self> {
        Distribution::Deterministic { value }.validated()
    }

    pub fn shifted_exponential(shift: f64, rate: f64) -> Result<Self> {
        Distribution::ShiftedExponential { shift, rate }.validated()
    }

    fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidDistribution(format!(
                    "{name} must be > 0, got {v}"
                )))
            }
        };
        let nonnegative = |name: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidDistribution(format!(
                    "{name} must be >= 0, got {v}"
                )))
            }
        };
        match *self {
            Distribution::Exponential { rate } => positive("rate", rate),
            Distribution::Erlang { shape, rate } => {
                if shape == 0 {
                    return Err(Error::InvalidDistribution("shape must be >= 1".into()));
                }
                positive("rate", rate)
            }
            Distribution::Deterministic { value } => nonnegative("value", value),
            Distribution::ShiftedExponential { shift, rate } => {
                nonnegative("shift", shift)?;
                positive("rate", rate)
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Distribution::Exponential { rate } => 1.0 / rate,
            Distribution::Erlang { shape, rate } => f64::from(shape) / rate,
            Distribution::Deterministic { value } => value,
            Distribution::ShiftedExponential { shift, rate } => shift + 1.0 / rate,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            Distribution::Exponential { rate } | Distribution::ShiftedExponential { rate, .. } => {
                1.0 / (rate * rate)
            }
            Distribution::Erlang { shape, rate } => f64::from(shape) / (rate * rate),
            Distribution::Deterministic { .. } => 0.0,
        }
    }

    /// Same family, rescaled so that `mean()` equals `mean`.
    pub fn with_mean(&self, mean: f64) -> Result<Self> {
        let current = self.mean();
        let scaled = match *self {
            Distribution::Exponential { .. } => Distribution::Exponential { rate: 1.0 / mean },
            Distribution::Erlang { shape, .. } => Distribution::Erlang {
                shape,
                rate: f64::from(shape) / mean,
            },
            Distribution::Deterministic { .. } => Distribution::Deterministic { value: mean },
            Distribution::ShiftedExponential { shift, rate } => {
                let factor = mean / current;
                Distribution::ShiftedExponential {
                    shift: shift * factor,
                    rate: rate / factor,
                }
            }
        };
        scaled.validated()
    }

    /// Draws one variate. Exponential parts are generated as a unit-rate
    /// exponential divided by the rate, so equal random streams under different
    /// rates give proportionally scaled values.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Distribution::Exponential { rate } => rng.sample::<f64, _>(Exp1) / rate,
            Distribution::Erlang { shape, rate } => {
                let total: f64 = (0..shape).map(|_| rng.sample::<f64, _>(Exp1)).sum();
                total / rate
            }
            Distribution::Deterministic { value } => value,
            Distribution::ShiftedExponential { shift, rate } => {
                shift + rng.sample::<f64, _>(Exp1) / rate
            }
        }
    }

    /// Parses the command-line grammar `exp:<rate>`, `erlang:<shape>:<rate>`,
    /// `det:<value>` and `sexp:<shift>:<rate>`.
    ///
    /// Rates are given per second and values/shifts in milliseconds; the result
    /// is expressed in milliseconds.
    pub fn from_flag(flag: &str) -> Result<Self> {
        let parts: Vec<&str> = flag.trim().split(':').collect();
        let bad = || {
            Error::InvalidDistribution(format!(
                "`{flag}`: expected exp:<rate>, erlang:<shape>:<rate>, det:<value> or sexp:<shift>:<rate>"
            ))
        };
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
        let per_ms = |rate_per_s: f64| rate_per_s / 1000.0;
        match parts.as_slice() {
            ["exp", rate] => Distribution::exponential(per_ms(num(rate)?)),
            ["erlang", shape, rate] => {
                let shape = shape.trim().parse::<u32>().map_err(|_| bad())?;
                Distribution::erlang(shape, per_ms(num(rate)?))
            }
            ["det", value] => Distribution::deterministic(num(value)?),
            ["sexp", shift, rate] => {
                Distribution::shifted_exponential(num(shift)?, per_ms(num(rate)?))
            }
            _ => Err(bad()),
        }
    }

    /// Inverse of [`Distribution::from_flag`].
    pub fn to_flag(&self) -> String {
        match *self {
            Distribution::Exponential { rate } => format!("exp:{}", rate * 1000.0),
            Distribution::Erlang { shape, rate } => format!("erlang:{shape}:{}", rate * 1000.0),
            Distribution::Deterministic { value } => format!("det:{value}"),
            Distribution::ShiftedExponential { shift, rate } => {
                format!("sexp:{shift}:{}", rate * 1000.0)
            }
        }
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Distribution::Exponential { rate } => write!(f, "Exp({rate})"),
            Distribution::Erlang { shape, rate } => write!(f, "Erlang({shape}, {rate})"),
            Distribution::Deterministic { value } => write!(f, "Det({value})"),
            Distribution::ShiftedExponential { shift, rate } => write!(f, "{shift} + Exp({rate})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stochastic::RngStream;

    fn moments(dist: Distribution, n: usize, seed: u64) -> (f64, f64) {
        let mut rng = RngStream::new(seed, 0);
        let xs: Vec<f64> = (0..n).map(|_| dist.sample(&mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        (mean, var)
    }

    #[test]
    fn deterministic_is_constant() {
        let d = Distribution::deterministic(1.0).unwrap();
        let mut rng = RngStream::new(3, 9);
        assert!((0..100).all(|_| d.sample(&mut rng) == 1.0));
    }

    #[test]
    fn exponential_mean() {
        // sd of the mean = 0.5 / 1000 = 5e-4; 0.002 is four standard errors
        let (mean, _) = moments(Distribution::exponential(2.0).unwrap(), 1_000_000, 11);
        assert!((mean - 0.5).abs() < 0.002, "mean {mean}");
    }

    #[test]
    fn erlang_moments() {
        let (mean, var) = moments(Distribution::erlang(4, 2.0).unwrap(), 1_000_000, 12);
        assert!((mean - 2.0).abs() < 0.004, "mean {mean}");
        assert!((var - 1.0).abs() < 0.01, "variance {var}");
    }

    #[test]
    fn all_laws_within_five_standard_errors() {
        let n = 1_000_000;
        for (i, d) in [
            Distribution::exponential(0.3).unwrap(),
            Distribution::erlang(3, 1.5).unwrap(),
            Distribution::deterministic(4.0).unwrap(),
            Distribution::shifted_exponential(2.6, 2.0).unwrap(),
        ]
        .into_iter()
        .enumerate()
        {
            let (mean, _) = moments(d, n, 100 + i as u64);
            let se = (d.variance() / n as f64).sqrt();
            assert!((mean - d.mean()).abs() <= 5.0 * se + 1e-12, "{d}: {mean}");
        }
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(Distribution::exponential(0.0).is_err());
        assert!(Distribution::exponential(-1.0).is_err());
        assert!(Distribution::erlang(0, 1.0).is_err());
        assert!(Distribution::deterministic(-0.5).is_err());
        assert!(Distribution::shifted_exponential(-1.0, 1.0).is_err());
        assert!(Distribution::exponential(f64::NAN).is_err());
    }

    #[test]
    fn flag_grammar() {
        assert_eq!(
            Distribution::from_flag("exp:0.5").unwrap(),
            Distribution::Exponential { rate: 0.0005 }
        );
        assert_eq!(
            Distribution::from_flag("erlang:3:2").unwrap(),
            Distribution::Erlang {
                shape: 3,
                rate: 0.002
            }
        );
        assert_eq!(
            Distribution::from_flag("det:10").unwrap(),
            Distribution::Deterministic { value: 10.0 }
        );
        assert_eq!(
            Distribution::from_flag("sexp:2.6:2000").unwrap(),
            Distribution::ShiftedExponential {
                shift: 2.6,
                rate: 2.0
            }
        );
        assert!(Distribution::from_flag("gauss:1").is_err());
        assert!(Distribution::from_flag("exp:-1").is_err());
        let d = Distribution::from_flag("sexp:2.6:2000").unwrap();
        assert_eq!(Distribution::from_flag(&d.to_flag()).unwrap(), d);
    }

    #[test]
    fn with_mean_keeps_family() {
        let d = Distribution::erlang(4, 2.0)
            .unwrap()
            .with_mean(10.0)
            .unwrap();
        assert_eq!(
            d,
            Distribution::Erlang {
                shape: 4,
                rate: 0.4
            }
        );
        let s = Distribution::shifted_exponential(1.0, 1.0)
            .unwrap()
            .with_mean(4.0)
            .unwrap();
        assert!((s.mean() - 4.0).abs() < 1e-12);
    }
}
