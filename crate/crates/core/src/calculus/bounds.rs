use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::envelope::{
    envelope_arrival_exponential, envelope_ideal_partition, envelope_overhead_fj,
    envelope_overhead_sm, envelope_rho_x, envelope_rho_z, envelope_service_exponential,
    envelope_splitmerge_big_erlang, envelope_splitmerge_tiny, Envelope,
};
use super::optimize::{feasibility_boundary, minimize};
use super::params::ModelParams;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Waiting,
    Sojourn,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Waiting => "waiting",
            Metric::Sojourn => "sojourn",
        })
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "waiting" | "wait" => Ok(Metric::Waiting),
            "sojourn" => Ok(Metric::Sojourn),
            other => Err(Error::InvalidArgument(format!("unknown metric {other:?}"))),
        }
    }
}

/// Outcome of a θ-optimized quantile bound `P[· > tau] <= epsilon`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub feasible: bool,
    pub theta_star: Option<f64>,
    pub tau: Option<f64>,
    pub epsilon: f64,
    /// Set for the overhead models, which are approximations rather than
    /// strict bounds.
    #[serde(default)]
    pub approximation: bool,
}

impl BoundResult {
    fn infeasible(epsilon: f64) -> Self {
        BoundResult {
            feasible: false,
            theta_star: None,
            tau: None,
            epsilon,
            approximation: false,
        }
    }

    /// `tau`, or infinity when infeasible.
    pub fn tau_or_inf(&self) -> f64 {
        self.tau.unwrap_or(f64::INFINITY)
    }

    fn shifted(mut self, constant: f64) -> Self {
        if let Some(t) = self.tau.as_mut() {
            *t += constant;
        }
        self
    }

    fn approximate(mut self) -> Self {
        self.approximation = true;
        self
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "epsilon must be in (0, 1], got {epsilon}"
        )))
    }
}

/// Finds the largest θ with `condition(θ) <= ρ_A(-θ)` and minimizes
/// `objective` below it.
fn optimize(
    arrival: &Envelope,
    condition: impl Fn(f64) -> f64,
    theta_max: f64,
    objective: impl Fn(f64) -> f64,
    epsilon: f64,
) -> BoundResult {
    let theta_max = theta_max.min(arrival.theta_max());
    let Some(upper) = feasibility_boundary(|t| arrival.eval(t) - condition(t), theta_max) else {
        return BoundResult::infeasible(epsilon);
    };
    let (theta, tau) = minimize(objective, upper);
    if !tau.is_finite() {
        return BoundResult::infeasible(epsilon);
    }
    BoundResult {
        feasible: true,
        theta_star: Some(theta),
        tau: Some(tau),
        epsilon,
        approximation: false,
    }
}

/// Single-server bound: waiting `τ = -ln(ε)/θ`, sojourn
/// `τ = ρ_S(θ) - ln(ε)/θ`, over `θ` with `ρ_S(θ) <= ρ_A(-θ)`.
pub fn bound_single_server(
    service: &Envelope,
    arrival: &Envelope,
    epsilon: f64,
    metric: Metric,
) -> Result<BoundResult> {
    check_epsilon(epsilon)?;
    let ln_eps = epsilon.ln();
    let cond = |t: f64| service.eval(t);
    Ok(match metric {
        Metric::Waiting => optimize(arrival, cond, service.theta_max(), |t| -ln_eps / t, epsilon),
        Metric::Sojourn => optimize(
            arrival,
            cond,
            service.theta_max(),
            |t| service.eval(t) - ln_eps / t,
            epsilon,
        ),
    })
}

/// Tiny-tasks split-merge: the single-server bound with
/// `ρ_S = ρ_X + (k - l) ρ_Z`.
pub fn bound_splitmerge_tiny(
    params: &ModelParams,
    epsilon: f64,
    metric: Metric,
) -> Result<BoundResult> {
    let service = envelope_splitmerge_tiny(params)?;
    let arrival = envelope_arrival_exponential(params.lambda)?;
    bound_single_server(&service, &arrival, epsilon, metric)
}

/// Big-tasks split-merge where each job is cut into `l` tasks of
/// `Erlang(k/l, μ)` work; `k` must be a multiple of `l`.
pub fn bound_splitmerge_big(
    params: &ModelParams,
    epsilon: f64,
    metric: Metric,
) -> Result<BoundResult> {
    params.validate()?;
    if !params.k.is_multiple_of(params.l) {
        return Err(Error::config("k", "must be a multiple of l for big tasks"));
    }
    let kappa = u32::try_from(params.k / params.l).map_err(|_| Error::config("k", "too large"))?;
    let service = envelope_splitmerge_big_erlang(params.l, kappa, params.mu)?;
    let arrival = envelope_arrival_exponential(params.lambda)?;
    bound_single_server(&service, &arrival, epsilon, metric)
}

/// Ideal partition of the `k` exponential tasks into `l` equal tasks,
/// which behaves as a single server.
pub fn bound_ideal_partition(
    params: &ModelParams,
    epsilon: f64,
    metric: Metric,
) -> Result<BoundResult> {
    let service = envelope_ideal_partition(params)?;
    let arrival = envelope_arrival_exponential(params.lambda)?;
    bound_single_server(&service, &arrival, epsilon, metric)
}

/// Conventional fork-join with `k = l` tasks, one per server: union bound
/// over the servers, `τ = ρ_Q(θ) + (ln l - ln ε)/θ` for the sojourn time.
pub fn bound_forkjoin_conventional(
    params: &ModelParams,
    epsilon: f64,
    metric: Metric,
) -> Result<BoundResult> {
    params.validate()?;
    check_epsilon(epsilon)?;
    if params.k != params.l {
        return Err(Error::config(
            "k",
            format!(
                "conventional fork-join needs k = l (k = {}, l = {})",
                params.k, params.l
            ),
        ));
    }
    let task = envelope_service_exponential(params.mu)?;
    let arrival = envelope_arrival_exponential(params.lambda)?;
    let log_term = (params.l as f64).ln() - epsilon.ln();
    let cond = |t: f64| task.eval(t);
    Ok(match metric {
        Metric::Waiting => optimize(&arrival, cond, task.theta_max(), |t| log_term / t, epsilon),
        Metric::Sojourn => optimize(
            &arrival,
            cond,
            task.theta_max(),
            |t| task.eval(t) + log_term / t,
            epsilon,
        ),
    })
}

fn forkjoin_tiny_with(
    params: &ModelParams,
    x: &Envelope,
    z: &Envelope,
    epsilon: f64,
    metric: Metric,
    task_index: Option<usize>,
) -> Result<BoundResult> {
    check_epsilon(epsilon)?;
    let arrival = envelope_arrival_exponential(params.lambda)?;
    let k = params.k as f64;
    let ln_eps = epsilon.ln();
    let cond = |t: f64| k * z.eval(t);
    let theta_max = params.mu;
    Ok(match metric {
        Metric::Waiting => {
            let i = task_index.unwrap_or(1);
            if i == 0 || i > params.k {
                return Err(Error::InvalidArgument(format!(
                    "task index must be in [1, {}], got {i}",
                    params.k
                )));
            }
            let before = (i - 1) as f64;
            optimize(
                &arrival,
                cond,
                theta_max,
                |t| before * z.eval(t) - ln_eps / t,
                epsilon,
            )
        }
        Metric::Sojourn => optimize(
            &arrival,
            cond,
            theta_max,
            |t| (k - 1.0) * z.eval(t) + x.eval(t) - ln_eps / t,
            epsilon,
        ),
    })
}

/// Tiny-tasks single-queue fork-join with in-sequence departures. Waiting
/// refers to task `task_index` (default 1) of a job; the rate condition is
/// `k ρ_Z(θ) <= ρ_A(-θ)` for `θ ∈ (0, μ)`.
pub fn bound_forkjoin_tiny(
    params: &ModelParams,
    epsilon: f64,
    metric: Metric,
    task_index: Option<usize>,
) -> Result<BoundResult> {
    params.validate()?;
    let x = envelope_rho_x(params.l, params.mu)?;
    let z = envelope_rho_z(params.l, params.mu)?;
    forkjoin_tiny_with(params, &x, &z, epsilon, metric, task_index)
}

/// Fork-join sojourn approximation with overhead: the tiny-tasks bound on
/// the overhead envelopes plus the non-blocking pre-departure delay
/// `c_pd_job + k c_pd_task`. Time units follow the overhead parameters (ms).
pub fn approx_sojourn_fj_overhead(params: &ModelParams, epsilon: f64) -> Result<BoundResult> {
    let (x, z) = envelope_overhead_fj(params)?;
    let pd = params.overhead_or_zero().pre_departure(params.k);
    let r = forkjoin_tiny_with(params, &x, &z, epsilon, Metric::Sojourn, None)?;
    Ok(r.shifted(pd).approximate())
}

/// Split-merge sojourn approximation with overhead: the blocking
/// pre-departure delay enters `ρ_{X^o}`, and `ρ_{X^o} + (k - l) ρ_{Z^o}` is
/// used as the single-server envelope.
pub fn approx_sojourn_sm_overhead(params: &ModelParams, epsilon: f64) -> Result<BoundResult> {
    let (x, z) = envelope_overhead_sm(params)?;
    let service = x.plus(&z.scaled(params.k - params.l));
    let arrival = envelope_arrival_exponential(params.lambda)?;
    Ok(bound_single_server(&service, &arrival, epsilon, Metric::Sojourn)?.approximate())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::harmonic;
    use crate::simulator::OverheadParams;

    /// Brute-force oracle: dense grid over `(0, theta_max)` with the rate
    /// condition checked pointwise.
    fn grid_oracle(
        cond: impl Fn(f64) -> f64,
        arrival: impl Fn(f64) -> f64,
        objective: impl Fn(f64) -> f64,
        theta_max: f64,
    ) -> Option<f64> {
        let n = 200_000;
        (1..n)
            .map(|i| theta_max * i as f64 / n as f64)
            .filter(|&t| cond(t) <= arrival(t))
            .map(objective)
            .min_by(f64::total_cmp)
    }

    fn mm1(lambda: f64, mu: f64, eps: f64, metric: Metric) -> BoundResult {
        let s = envelope_service_exponential(mu).unwrap();
        let a = envelope_arrival_exponential(lambda).unwrap();
        bound_single_server(&s, &a, eps, metric).unwrap()
    }

    fn exp_s(mu: f64, t: f64) -> f64 {
        (mu / (mu - t)).ln() / t
    }

    fn exp_a(lambda: f64, t: f64) -> f64 {
        ((lambda + t) / lambda).ln() / t
    }

    #[test]
    fn mm1_waiting_example() {
        let r = mm1(0.5, 1.0, 1e-3, Metric::Waiting);
        assert!(r.feasible);
        assert!((r.theta_star.unwrap() - 0.5).abs() < 1e-8);
        assert!((r.tau.unwrap() - 13.8155).abs() < 1e-4);
        let oracle = grid_oracle(
            |t| exp_s(1.0, t),
            |t| exp_a(0.5, t),
            |t| -(1e-3f64).ln() / t,
            1.0,
        )
        .unwrap();
        assert!(r.tau.unwrap() <= oracle + 1e-9);
        assert!((r.tau.unwrap() - oracle) / oracle > -1e-4);
    }

    #[test]
    fn mm1_sojourn_example() {
        let r = mm1(0.5, 1.0, 1e-3, Metric::Sojourn);
        assert!((r.tau.unwrap() - 15.2018).abs() < 1e-3, "{:?}", r);
        let oracle = grid_oracle(
            |t| exp_s(1.0, t),
            |t| exp_a(0.5, t),
            |t| exp_s(1.0, t) - (1e-3f64).ln() / t,
            1.0,
        )
        .unwrap();
        assert!(r.tau.unwrap() <= oracle + 1e-9);
        assert!((oracle - r.tau.unwrap()) / oracle < 1e-4);
    }

    #[test]
    fn overloaded_single_server_is_infeasible() {
        let r = mm1(1.2, 1.0, 1e-3, Metric::Sojourn);
        assert!(!r.feasible);
        assert!(r.tau.is_none() && r.theta_star.is_none());
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"feasible\":false"));
    }

    #[test]
    fn big_tasks_splitmerge_feasibility_follows_harmonic_number() {
        // 1/λ = 5 > H_50 ≈ 4.499: stable
        let p = ModelParams::new(50, 50, 0.2, 1.0).unwrap();
        let r = bound_splitmerge_tiny(&p, 1e-6, Metric::Sojourn).unwrap();
        assert!(harmonic(50) < 5.0);
        assert!(r.feasible && r.tau.unwrap().is_finite());
        let p = ModelParams::new(50, 50, 1.0 / 4.4, 1.0).unwrap();
        assert!(
            !bound_splitmerge_tiny(&p, 1e-6, Metric::Sojourn)
                .unwrap()
                .feasible
        );
    }

    #[test]
    fn feasible_results_satisfy_the_rate_condition() {
        let p = ModelParams::new(10, 40, 0.08, 1.0).unwrap();
        let r = bound_splitmerge_tiny(&p, 1e-3, Metric::Sojourn).unwrap();
        let t = r.theta_star.unwrap();
        let s = envelope_splitmerge_tiny(&p).unwrap();
        assert!(t > 0.0 && t < s.theta_max());
        assert!(s.eval(t) <= exp_a(0.08, t) + 1e-12);
    }

    #[test]
    fn splitmerge_tiny_matches_grid_oracle() {
        let p = ModelParams::new(10, 40, 0.1, 1.0).unwrap();
        let env = envelope_splitmerge_tiny(&p).unwrap();
        let r = bound_splitmerge_tiny(&p, 1e-3, Metric::Sojourn).unwrap();
        let oracle = grid_oracle(
            |t| env.eval(t),
            |t| exp_a(0.1, t),
            |t| env.eval(t) - (1e-3f64).ln() / t,
            1.0,
        )
        .unwrap();
        assert!(r.tau.unwrap() <= oracle + 1e-9);
        assert!((oracle - r.tau.unwrap()) / oracle < 1e-4);
    }

    #[test]
    fn conventional_forkjoin() {
        let p1 = ModelParams::new(1, 1, 0.5, 1.0).unwrap();
        let a = bound_forkjoin_conventional(&p1, 1e-3, Metric::Sojourn).unwrap();
        let b = mm1(0.5, 1.0, 1e-3, Metric::Sojourn);
        assert_eq!(a.tau, b.tau);

        let at = |l| {
            bound_forkjoin_conventional(
                &ModelParams::new(l, l, 0.2, 1.0).unwrap(),
                1e-6,
                Metric::Sojourn,
            )
            .unwrap()
        };
        let (r10, r50) = (at(10), at(50));
        let growth = r50.tau.unwrap() - r10.tau.unwrap();
        let predicted = (50f64.ln() - 10f64.ln()) / r50.theta_star.unwrap();
        assert!(growth > 0.0);
        assert!(
            ((growth - predicted) / predicted).abs() < 0.2,
            "{growth} vs {predicted}"
        );

        let one = bound_forkjoin_conventional(
            &ModelParams::new(50, 50, 0.2, 1.0).unwrap(),
            1.0,
            Metric::Sojourn,
        )
        .unwrap();
        assert!(one.tau.unwrap() > 0.0);
        assert!(bound_forkjoin_conventional(
            &ModelParams::new(5, 10, 0.2, 1.0).unwrap(),
            0.1,
            Metric::Sojourn
        )
        .is_err());
    }

    #[test]
    fn forkjoin_tiny_reduces_to_single_server() {
        let p = ModelParams::new(1, 1, 0.5, 1.0).unwrap();
        for metric in [Metric::Waiting, Metric::Sojourn] {
            let a = bound_forkjoin_tiny(&p, 1e-3, metric, None).unwrap();
            let b = mm1(0.5, 1.0, 1e-3, metric);
            assert!((a.tau.unwrap() - b.tau.unwrap()).abs() < 1e-9, "{metric}");
        }
    }

    #[test]
    fn forkjoin_tiny_waiting_matches_grid_oracle() {
        let p = ModelParams::new(50, 50, 0.5, 1.0).unwrap();
        let r = bound_forkjoin_tiny(&p, 1e-6, Metric::Waiting, Some(1)).unwrap();
        let z = |t: f64| exp_s(50.0, t);
        let oracle = grid_oracle(
            |t| 50.0 * z(t),
            |t| exp_a(0.5, t),
            |t| -(1e-6f64).ln() / t,
            1.0,
        )
        .unwrap();
        assert!(r.tau.unwrap() <= oracle + 1e-9);
        assert!((oracle - r.tau.unwrap()) / oracle < 1e-4);

        let later = bound_forkjoin_tiny(&p, 1e-6, Metric::Waiting, Some(50)).unwrap();
        assert!(later.tau.unwrap() > r.tau.unwrap());
        assert!(bound_forkjoin_tiny(&p, 1e-6, Metric::Waiting, Some(51)).is_err());
    }

    #[test]
    fn forkjoin_tiny_approaches_ideal_partition() {
        let mut gaps = Vec::new();
        for k in [50usize, 100, 200, 400] {
            let p = ModelParams::new(50, k, 0.5, k as f64 / 50.0).unwrap();
            let fj = bound_forkjoin_tiny(&p, 1e-6, Metric::Sojourn, None)
                .unwrap()
                .tau
                .unwrap();
            let ideal = bound_ideal_partition(&p, 1e-6, Metric::Sojourn)
                .unwrap()
                .tau
                .unwrap();
            assert!(fj >= ideal, "k={k}: {fj} < {ideal}");
            gaps.push(fj - ideal);
        }
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    }

    #[test]
    fn overhead_approximations() {
        let base = ModelParams::new(50, 200, 0.5e-3, 200.0 / 50.0 * 1e-3).unwrap();
        let zero = base.with_overhead(OverheadParams::zero());

        let plain = bound_forkjoin_tiny(&base, 1e-2, Metric::Sojourn, None).unwrap();
        let approx = approx_sojourn_fj_overhead(&zero, 1e-2).unwrap();
        assert_eq!(plain.tau.unwrap().to_bits(), approx.tau.unwrap().to_bits());
        assert_eq!(plain.theta_star, approx.theta_star);
        assert!(approx.approximation && !plain.approximation);

        let plain = bound_splitmerge_tiny(&base, 1e-2, Metric::Sojourn).unwrap();
        let approx = approx_sojourn_sm_overhead(&zero, 1e-2).unwrap();
        assert_eq!(plain.tau.unwrap().to_bits(), approx.tau.unwrap().to_bits());

        let with = base.with_overhead(OverheadParams::paper());
        let fj = approx_sojourn_fj_overhead(&with, 1e-2).unwrap();
        let plain = bound_forkjoin_tiny(&base, 1e-2, Metric::Sojourn, None).unwrap();
        assert!(fj.tau.unwrap() > plain.tau.unwrap() + 21.48 - 1e-9);
    }

    #[test]
    fn splitmerge_overhead_stability_examples() {
        let p = |k: usize| {
            ModelParams::new(50, k, 0.5e-3, k as f64 / 50.0 * 1e-3)
                .unwrap()
                .with_overhead(OverheadParams::zero())
        };
        assert!(!approx_sojourn_sm_overhead(&p(50), 1e-2).unwrap().feasible);
        assert!(approx_sojourn_sm_overhead(&p(200), 1e-2).unwrap().feasible);
    }

    #[test]
    fn big_erlang_splitmerge_bound() {
        // κ = 1 is the exponential big-tasks case
        let p = ModelParams::new(10, 10, 0.2, 1.0).unwrap();
        let a = bound_splitmerge_big(&p, 1e-3, Metric::Sojourn).unwrap();
        let b = bound_splitmerge_tiny(&p, 1e-3, Metric::Sojourn).unwrap();
        assert!(((a.tau.unwrap() - b.tau.unwrap()) / b.tau.unwrap()).abs() < 1e-6);
        let p = ModelParams::new(10, 40, 0.1, 1.0).unwrap();
        let big = bound_splitmerge_big(&p, 1e-3, Metric::Sojourn).unwrap();
        let tiny = bound_splitmerge_tiny(&p, 1e-3, Metric::Sojourn).unwrap();
        assert!(big.tau.unwrap() > tiny.tau.unwrap());
    }

    #[test]
    fn metric_parsing() {
        assert_eq!("waiting".parse::<Metric>().unwrap(), Metric::Waiting);
        assert_eq!("Sojourn".parse::<Metric>().unwrap(), Metric::Sojourn);
        assert!("median".parse::<Metric>().is_err());
        assert!(bound_splitmerge_tiny(
            &ModelParams::new(1, 1, 0.1, 1.0).unwrap(),
            0.0,
            Metric::Sojourn
        )
        .is_err());
    }
}
