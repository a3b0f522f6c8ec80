use std::fmt;
use std::sync::Arc;

use super::erlang::mgf_max_erlang_excess;
use super::params::ModelParams;
use crate::stochastic::Distribution;
use crate::{Error, Result};

/// Below this ratio of `θ` to a rate, `ln(r / (r - θ)) / θ` is evaluated by its
/// series around zero.
const SERIES_THRESHOLD: f64 = 1e-8;

/// `(1/θ) ln(rate / (rate - θ))`, the envelope rate of an `Exp(rate)`
/// increment.
pub(crate) fn exp_service_rate(rate: f64, theta: f64) -> f64 {
    let x = theta / rate;
    if x < SERIES_THRESHOLD {
        (1.0 + x * (0.5 + x / 3.0)) / rate
    } else {
        -(-x).ln_1p() / theta
    }
}

/// `-(1/θ) ln(rate / (rate + θ))`, the envelope rate of negated `Exp(rate)`
/// inter-arrival times.
pub(crate) fn exp_arrival_rate(rate: f64, theta: f64) -> f64 {
    let x = theta / rate;
    if x < SERIES_THRESHOLD {
        (1.0 - x * (0.5 - x / 3.0)) / rate
    } else {
        x.ln_1p() / theta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvelopeKind {
    /// `θ ↦ ρ_A(-θ)`, nonincreasing.
    Arrival,
    /// `θ ↦ ρ_S(θ)`, nondecreasing.
    Service,
}

type RateFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Envelope rate as a function of `θ ∈ (0, theta_max)`.
#[derive(Clone)]
pub struct Envelope {
    rho: RateFn,
    theta_max: f64,
    kind: EnvelopeKind,
    label: String,
}

impl fmt::Debug for Envelope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Envelope")
            .field("label", &self.label)
            .field("kind", &self.kind)
            .field("theta_max", &self.theta_max)
            .finish()
    }
}

impl Envelope {
    pub fn new(
        kind: EnvelopeKind,
        label: impl Into<String>,
        theta_max: f64,
        rho: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Envelope {
            rho: Arc::new(rho),
            theta_max,
            kind,
            label: label.into(),
        }
    }

    pub fn theta_max(&self) -> f64 {
        self.theta_max
    }

    pub fn kind(&self) -> EnvelopeKind {
        self.kind
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Evaluates without a domain check. Near `θ = 0` this returns the mean of
    /// the increment.
    pub fn eval(&self, theta: f64) -> f64 {
        (self.rho)(theta)
    }

    pub fn rate(&self, theta: f64) -> Result<f64> {
        if theta > 0.0 && theta < self.theta_max {
            Ok(self.eval(theta))
        } else {
            Err(Error::domain(
                "envelope rate",
                theta,
                format!("(0, {}) of {}", self.theta_max, self.label),
            ))
        }
    }

    /// Pointwise sum; the domain is the intersection.
    pub fn plus(&self, other: &Envelope) -> Envelope {
        debug_assert_eq!(self.kind, other.kind);
        let (a, b) = (self.rho.clone(), other.rho.clone());
        Envelope {
            rho: Arc::new(move |t| a(t) + b(t)),
            theta_max: self.theta_max.min(other.theta_max),
            kind: self.kind,
            label: format!("{} + {}", self.label, other.label),
        }
    }

    /// `n`-fold sum of iid increments.
    pub fn scaled(&self, n: usize) -> Envelope {
        let a = self.rho.clone();
        let factor = n as f64;
        Envelope {
            rho: Arc::new(move |t| factor * a(t)),
            theta_max: self.theta_max,
            kind: self.kind,
            label: format!("{n}·({})", self.label),
        }
    }

    /// Adds a deterministic constant to the increments.
    pub fn shifted(&self, constant: f64) -> Envelope {
        let a = self.rho.clone();
        Envelope {
            rho: Arc::new(move |t| constant + a(t)),
            theta_max: self.theta_max,
            kind: self.kind,
            label: format!("{constant} + {}", self.label),
        }
    }
}

fn require_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "{name} must be > 0, got {v}"
        )))
    }
}

fn require_theta(what: &'static str, theta: f64, theta_max: f64) -> Result<()> {
    if theta > 0.0 && theta < theta_max {
        Ok(())
    } else {
        Err(Error::domain(what, theta, format!("(0, {theta_max})")))
    }
}

/// `ρ_A(-θ) = -(1/θ) ln(λ / (λ + θ))` for `Exp(λ)` inter-arrival times.
pub fn rho_arrival_exponential(lambda: f64, theta: f64) -> Result<f64> {
    require_positive("lambda", lambda)?;
    require_theta("rho_arrival_exponential", theta, f64::INFINITY)?;
    Ok(exp_arrival_rate(lambda, theta))
}

/// `ρ_S(θ) = (1/θ) ln(μ / (μ - θ))` for `Exp(μ)` service times, `θ ∈ (0, μ)`.
pub fn rho_service_exponential(mu: f64, theta: f64) -> Result<f64> {
    require_positive("mu", mu)?;
    require_theta("rho_service_exponential", theta, mu)?;
    Ok(exp_service_rate(mu, theta))
}

fn rho_x_unchecked(l: usize, mu: f64, theta: f64) -> f64 {
    (1..=l)
        .map(|i| exp_service_rate(i as f64 * mu, theta))
        .sum()
}

/// Envelope rate of the maximum of `l` residual `Exp(μ)` service times,
/// `(1/θ) Σ_{i=1}^{l} ln(iμ / (iμ - θ))` on `(0, μ)`.
pub fn rho_x(l: usize, mu: f64, theta: f64) -> Result<f64> {
    require_positive("mu", mu)?;
    if l == 0 {
        return Err(Error::InvalidArgument("l must be >= 1".into()));
    }
    require_theta("rho_x", theta, mu)?;
    Ok(rho_x_unchecked(l, mu, theta))
}

/// Envelope rate of the time until the next of `l` busy workers frees up,
/// `(1/θ) ln(lμ / (lμ - θ))` on `(0, lμ)`.
pub fn rho_z(l: usize, mu: f64, theta: f64) -> Result<f64> {
    require_positive("mu", mu)?;
    if l == 0 {
        return Err(Error::InvalidArgument("l must be >= 1".into()));
    }
    let rate = l as f64 * mu;
    require_theta("rho_z", theta, rate)?;
    Ok(exp_service_rate(rate, theta))
}

pub fn envelope_arrival_exponential(lambda: f64) -> Result<Envelope> {
    require_positive("lambda", lambda)?;
    Ok(Envelope::new(
        EnvelopeKind::Arrival,
        format!("Exp({lambda}) arrivals"),
        f64::INFINITY,
        move |t| exp_arrival_rate(lambda, t),
    ))
}

pub fn envelope_service_exponential(mu: f64) -> Result<Envelope> {
    require_positive("mu", mu)?;
    Ok(Envelope::new(
        EnvelopeKind::Service,
        format!("Exp({mu}) service"),
        mu,
        move |t| exp_service_rate(mu, t),
    ))
}

/// Arrival envelope of iid inter-arrival times with the given law.
pub fn arrival_envelope(dist: &Distribution) -> Result<Envelope> {
    dist.validate()?;
    let label = format!("{dist} arrivals");
    let env = match *dist {
        Distribution::Exponential { rate } => {
            Envelope::new(EnvelopeKind::Arrival, label, f64::INFINITY, move |t| {
                exp_arrival_rate(rate, t)
            })
        }
        Distribution::Erlang { shape, rate } => {
            let s = f64::from(shape);
            Envelope::new(EnvelopeKind::Arrival, label, f64::INFINITY, move |t| {
                s * exp_arrival_rate(rate, t)
            })
        }
        Distribution::Deterministic { value } => {
            Envelope::new(EnvelopeKind::Arrival, label, f64::INFINITY, move |_| value)
        }
        Distribution::ShiftedExponential { shift, rate } => {
            Envelope::new(EnvelopeKind::Arrival, label, f64::INFINITY, move |t| {
                shift + exp_arrival_rate(rate, t)
            })
        }
    };
    Ok(env)
}

/// Service envelope of iid service increments with the given law.
pub fn service_envelope(dist: &Distribution) -> Result<Envelope> {
    dist.validate()?;
    let label = format!("{dist} service");
    let env = match *dist {
        Distribution::Exponential { rate } => {
            Envelope::new(EnvelopeKind::Service, label, rate, move |t| {
                exp_service_rate(rate, t)
            })
        }
        Distribution::Erlang { shape, rate } => {
            let s = f64::from(shape);
            Envelope::new(EnvelopeKind::Service, label, rate, move |t| {
                s * exp_service_rate(rate, t)
            })
        }
        Distribution::Deterministic { value } => {
            Envelope::new(EnvelopeKind::Service, label, f64::INFINITY, move |_| value)
        }
        Distribution::ShiftedExponential { shift, rate } => {
            Envelope::new(EnvelopeKind::Service, label, rate, move |t| {
                shift + exp_service_rate(rate, t)
            })
        }
    };
    Ok(env)
}

pub fn envelope_rho_x(l: usize, mu: f64) -> Result<Envelope> {
    require_positive("mu", mu)?;
    if l == 0 {
        return Err(Error::InvalidArgument("l must be >= 1".into()));
    }
    Ok(Envelope::new(
        EnvelopeKind::Service,
        format!("ρ_X(l={l}, μ={mu})"),
        mu,
        move |t| rho_x_unchecked(l, mu, t),
    ))
}

pub fn envelope_rho_z(l: usize, mu: f64) -> Result<Envelope> {
    require_positive("mu", mu)?;
    if l == 0 {
        return Err(Error::InvalidArgument("l must be >= 1".into()));
    }
    let rate = l as f64 * mu;
    Ok(Envelope::new(
        EnvelopeKind::Service,
        format!("ρ_Z(l={l}, μ={mu})"),
        rate,
        move |t| exp_service_rate(rate, t),
    ))
}

/// Split-merge with `k >= l` exponential tiny tasks: `ρ_X + (k - l) ρ_Z` on
/// `(0, μ)`.
pub fn envelope_splitmerge_tiny(params: &ModelParams) -> Result<Envelope> {
    params.validate()?;
    let x = envelope_rho_x(params.l, params.mu)?;
    let z = envelope_rho_z(params.l, params.mu)?;
    Ok(x.plus(&z.scaled(params.k - params.l)))
}

/// Big-tasks split-merge with `l` exponential tasks: the maximum of `l`
/// exponentials.
pub fn envelope_splitmerge_big(l: usize, mu: f64) -> Result<Envelope> {
    Ok(Envelope::new(
        EnvelopeKind::Service,
        format!("max of {l} Exp({mu})"),
        mu,
        move |t| (1..=l).map(|i| exp_service_rate(i as f64 * mu, t)).sum(),
    ))
}

/// Big-tasks split-merge with `l` `Erlang(kappa, μ)` tasks, `ln(M(θ)) / θ`
/// with the MGF of the maximum integrated numerically. Evaluates to infinity
/// where the integral cannot be computed.
pub fn envelope_splitmerge_big_erlang(l: usize, kappa: u32, mu: f64) -> Result<Envelope> {
    require_positive("mu", mu)?;
    if l == 0 || kappa == 0 {
        return Err(Error::InvalidArgument("l and kappa must be >= 1".into()));
    }
    let mean = super::erlang::expected_max_erlang(l, kappa, mu)?;
    Ok(Envelope::new(
        EnvelopeKind::Service,
        format!("max of {l} Erlang({kappa}, {mu})"),
        mu,
        move |t| {
            if t < SERIES_THRESHOLD * mu {
                return mean;
            }
            match mgf_max_erlang_excess(l, kappa, mu, t) {
                Ok(excess) => (t * excess).ln_1p() / t,
                Err(_) => f64::INFINITY,
            }
        },
    ))
}

/// Jobs of `k` `Exp(μ)` tasks repartitioned into `l` equal tasks:
/// `(k/θ) ln(lμ / (lμ - θ))` on `(0, lμ)`.
pub fn envelope_ideal_partition(params: &ModelParams) -> Result<Envelope> {
    params.validate()?;
    let rate = params.l as f64 * params.mu;
    let k = params.k as f64;
    Ok(Envelope::new(
        EnvelopeKind::Service,
        format!("ideal partition k={} l={}", params.k, params.l),
        rate,
        move |t| k * exp_service_rate(rate, t),
    ))
}

/// Fork-join overhead envelopes `(ρ_{X^o}, ρ_{Z^o})`: the mean task-service
/// overhead is added to `ρ_X`, and a `1/l` share of it to `ρ_Z`.
pub fn envelope_overhead_fj(params: &ModelParams) -> Result<(Envelope, Envelope)> {
    params.validate()?;
    let o = params.overhead_or_zero();
    let task = o.task_mean();
    let x = envelope_rho_x(params.l, params.mu)?.shifted(task);
    let z = envelope_rho_z(params.l, params.mu)?.shifted(task / params.l as f64);
    Ok((x, z))
}

/// Split-merge overhead envelopes: as for fork-join, but the blocking
/// pre-departure overhead `c_pd_job + k c_pd_task` also enters `ρ_{X^o}`.
pub fn envelope_overhead_sm(params: &ModelParams) -> Result<(Envelope, Envelope)> {
    params.validate()?;
    let o = params.overhead_or_zero();
    let task = o.task_mean();
    let x = envelope_rho_x(params.l, params.mu)?.shifted(task + o.pre_departure(params.k));
    let z = envelope_rho_z(params.l, params.mu)?.shifted(task / params.l as f64);
    Ok((x, z))
}
