use super::params::ModelParams;
use super::quadrature::integrate_half_line;
use crate::{Error, Result};

const QUAD_REL_TOL: f64 = 1e-13;
const TAIL_TOL: f64 = 1e-13;

/// `H_n = Σ_{i=1}^{n} 1/i`, summed from the small terms up.
pub fn harmonic(n: usize) -> f64 {
    (1..=n).rev().map(|i| 1.0 / i as f64).sum()
}

fn check_erlang(kappa: u32, mu: f64) -> Result<()> {
    if kappa == 0 {
        return Err(Error::InvalidArgument("Erlang shape must be >= 1".into()));
    }
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "Erlang rate must be > 0, got {mu}"
        )));
    }
    Ok(())
}

/// `e^{-y} Σ_{i<κ} y^i / i!` by forward recursion, while `e^{-y}` is
/// representable.
fn poisson_head(kappa: u32, y: f64) -> Option<f64> {
    if y >= 700.0 {
        return None;
    }
    let mut term = (-y).exp();
    let mut sum = term;
    for i in 1..kappa {
        term *= y / f64::from(i);
        sum += term;
    }
    (sum > 0.0).then_some(sum.min(1.0))
}

/// `ln Σ_{i<κ} y^i / i!`, so that `ln P[Q > x] = ln_head - μx`.
fn ln_poisson_head(kappa: u32, y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    let ln_y = y.ln();
    let mut ln_fact = 0.0;
    let mut top = f64::NEG_INFINITY;
    let logs: Vec<f64> = (0..kappa)
        .map(|i| {
            if i > 0 {
                ln_fact += f64::from(i).ln();
            }
            let v = f64::from(i) * ln_y - ln_fact;
            top = top.max(v);
            v
        })
        .collect();
    top + logs.iter().map(|v| (v - top).exp()).sum::<f64>().ln()
}

/// `ln P[Q > x]` for `Q ~ Erlang(kappa, mu)`, `x >= 0`.
pub(crate) fn erlang_ln_ccdf(kappa: u32, mu: f64, x: f64) -> f64 {
    let y = mu * x;
    if y <= 0.0 {
        return 0.0;
    }
    match poisson_head(kappa, y) {
        Some(p) => p.ln(),
        None => ln_poisson_head(kappa, y) - y,
    }
}

/// `P[Q > x]` for `Q ~ Erlang(kappa, mu)`.
pub fn erlang_ccdf(kappa: u32, mu: f64, x: f64) -> Result<f64> {
    check_erlang(kappa, mu)?;
    if x.is_nan() || x < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "Erlang CDF needs x >= 0, got {x}"
        )));
    }
    let y = mu * x;
    if y <= 0.0 {
        return Ok(1.0);
    }
    Ok(poisson_head(kappa, y).unwrap_or_else(|| erlang_ln_ccdf(kappa, mu, x).exp()))
}

/// `1 - e^{-μx} Σ_{i=0}^{κ-1} (μx)^i / i!`.
pub fn erlang_cdf(kappa: u32, mu: f64, x: f64) -> Result<f64> {
    Ok(1.0 - erlang_ccdf(kappa, mu, x)?)
}

/// `θx + ln(1 - F(x)^l)`, the log of the tilted tail of the maximum of `l`
/// iid Erlangs. Far in the tail the exponent is formed as `-(μ - θ)x` to
/// avoid cancelling two large terms.
fn ln_tilted_max_tail(l: usize, kappa: u32, mu: f64, theta: f64, x: f64) -> f64 {
    let ln_fbar = erlang_ln_ccdf(kappa, mu, x);
    if ln_fbar < -40.0 {
        (l as f64).ln() - (mu - theta) * x + ln_poisson_head(kappa, mu * x)
    } else {
        let fbar = ln_fbar.exp();
        theta * x + (-(l as f64 * (-fbar).ln_1p()).exp_m1()).ln()
    }
}

/// `∫₀^∞ e^{θx} (1 - F(x)^l) dx` for `θ ∈ [0, μ)`, truncated once the
/// remaining tail is below `TAIL_TOL` relative to the accumulated integral.
fn tilted_max_integral(l: usize, kappa: u32, mu: f64, theta: f64) -> Result<f64> {
    let u0 = 2.0 * f64::from(kappa) / mu;
    let gap = mu - theta;
    let k = f64::from(kappa);
    integrate_half_line(
        |x| ln_tilted_max_tail(l, kappa, mu, theta, x).exp(),
        u0,
        QUAD_REL_TOL,
        |u, total| {
            // l·P[Q > u]·e^{θu} times a bound on the decay length beyond u
            u * gap > 2.0 * k
                && ln_tilted_max_tail(l, kappa, mu, theta, u) + (2.0 / gap).ln()
                    < (TAIL_TOL * total).ln()
        },
    )
}

/// Mean of `Δ = max(Q_1..Q_l)` with `Q_i ~ Erlang(kappa, mu)` iid, by
/// integrating `1 - F(x)^l` over the half line.
pub fn expected_max_erlang(l: usize, kappa: u32, mu: f64) -> Result<f64> {
    check_erlang(kappa, mu)?;
    if l == 0 {
        return Err(Error::InvalidArgument("l must be >= 1".into()));
    }
    tilted_max_integral(l, kappa, mu, 0.0)
}

/// `∫₀^∞ e^{θu} (1 - F(u)^l) du`, so that `E[e^{θΔ}] = 1 + θ·I`.
pub(crate) fn mgf_max_erlang_excess(l: usize, kappa: u32, mu: f64, theta: f64) -> Result<f64> {
    check_erlang(kappa, mu)?;
    if l == 0 {
        return Err(Error::InvalidArgument("l must be >= 1".into()));
    }
    if !(theta > 0.0 && theta < mu) {
        return Err(Error::domain("mgf_max_erlang", theta, format!("(0, {mu})")));
    }
    tilted_max_integral(l, kappa, mu, theta)
}

/// `E[e^{θΔ}]` for `Δ = max(Q_1..Q_l)`, `Q_i ~ Erlang(kappa, mu)`,
/// `θ ∈ (0, μ)`.
pub fn mgf_max_erlang(l: usize, kappa: u32, mu: f64, theta: f64) -> Result<f64> {
    Ok(1.0 + theta * mgf_max_erlang_excess(l, kappa, mu, theta)?)
}

/// `E[Δ] = (1/μ)(k/l + Σ_{i=2}^{l} 1/i)` for tiny-tasks split-merge.
pub fn expected_job_service_tiny(params: &ModelParams) -> f64 {
    let (l, k) = (params.l as f64, params.k as f64);
    (k / l + harmonic(params.l) - 1.0) / params.mu
}

/// Largest stable utilization of tiny-tasks split-merge,
/// `1 / (1 + (1/κ) Σ_{i=2}^{l} 1/i)`.
pub fn stability_tiny(l: usize, kappa: f64) -> f64 {
    1.0 / (1.0 + (harmonic(l) - 1.0) / kappa)
}

/// Largest stable utilization of big-tasks split-merge with `l` tasks of
/// `Erlang(kappa, mu)` work each: `κ / (μ E[Δ])`.
pub fn stability_big(l: usize, kappa: u32, mu: f64) -> Result<f64> {
    let mean = expected_max_erlang(l, kappa, mu)?;
    Ok((f64::from(kappa) / (mu * mean)).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ContinuousCDF, Gamma};

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn cdf_examples() {
        assert!((erlang_cdf(1, 1.0, 1.0).unwrap() - 0.632121).abs() < 1e-6);
        assert_eq!(erlang_cdf(2, 1.0, 0.0).unwrap(), 0.0);
        assert!((erlang_cdf(2, 2.0, 1.0).unwrap() - 0.593994).abs() < 1e-6);
        assert!(erlang_cdf(2, 1.0, -0.1).is_err());
    }

    #[test]
    fn cdf_matches_gamma_oracle() {
        for kappa in [1u32, 2, 5, 20, 60] {
            for mu in [0.5, 1.0, 3.0] {
                let g = Gamma::new(f64::from(kappa), mu).unwrap();
                let mut prev = 0.0;
                for j in 0..200 {
                    let x = j as f64 * 0.25 * f64::from(kappa) / mu / 20.0;
                    let ours = erlang_cdf(kappa, mu, x).unwrap();
                    assert!((ours - g.cdf(x)).abs() < 1e-12, "κ={kappa} μ={mu} x={x}");
                    assert!(ours >= prev - 1e-15);
                    prev = ours;
                }
            }
        }
    }

    #[test]
    fn far_tail_is_finite_in_log_space() {
        let v = erlang_ln_ccdf(5, 1.0, 2000.0);
        let y = 2000f64;
        let head: f64 = [1.0, y, y * y / 2.0, y.powi(3) / 6.0, y.powi(4) / 24.0]
            .iter()
            .sum();
        let expected = head.ln() - y;
        assert!((v - expected).abs() < 1e-9, "{v} vs {expected}");
    }

    #[test]
    fn expected_max_examples() {
        assert!((expected_max_erlang(1, 3, 1.0).unwrap() - 3.0).abs() < 1e-9);
        assert!((expected_max_erlang(2, 1, 1.0).unwrap() - 1.5).abs() < 1e-9);
        assert!((expected_max_erlang(2, 2, 1.0).unwrap() - 2.75).abs() < 1e-9);
        for l in [3usize, 10, 50, 200] {
            let h = harmonic(l) / 2.5;
            assert!(
                rel(expected_max_erlang(l, 1, 2.5).unwrap(), h) < 1e-8,
                "l={l}"
            );
        }
    }

    #[test]
    fn expected_max_matches_order_statistic_oracle() {
        // E[max] = E[X] + ... via the identity E[max of 2] = 2E[X] - E[min]
        // with E[min] = ∫ P[X > x]^2 dx evaluated by statrs
        for kappa in [3u32, 7] {
            let g = Gamma::new(f64::from(kappa), 1.0).unwrap();
            let h = 1e-3;
            let mut e_min = 0.0;
            let mut x = 0.0;
            while x < 80.0 {
                let f = |t: f64| g.sf(t).powi(2);
                e_min += h / 6.0 * (f(x) + 4.0 * f(x + h / 2.0) + f(x + h));
                x += h;
            }
            let oracle = 2.0 * f64::from(kappa) - e_min;
            assert!(rel(expected_max_erlang(2, kappa, 1.0).unwrap(), oracle) < 1e-8);
        }
    }

    #[test]
    fn mgf_examples() {
        assert!(rel(mgf_max_erlang(1, 1, 1.0, 0.5).unwrap(), 2.0) < 1e-9);
        assert!(rel(mgf_max_erlang(2, 1, 1.0, 0.5).unwrap(), 8.0 / 3.0) < 1e-9);
        assert!((mgf_max_erlang(2, 2, 1.0, 1e-9).unwrap() - 1.0).abs() < 1e-8);
        assert!(mgf_max_erlang(2, 2, 1.0, 1.0).is_err());
        assert!(mgf_max_erlang(2, 2, 1.0, 0.0).is_err());
    }

    #[test]
    fn mgf_matches_product_identity() {
        for l in [1usize, 2, 5, 10, 50] {
            for frac in [0.01, 0.2, 0.5, 0.8, 0.95] {
                let mu = 1.7;
                let theta = frac * mu;
                let product: f64 = (1..=l)
                    .map(|i| i as f64 * mu / (i as f64 * mu - theta))
                    .product();
                let m = mgf_max_erlang(l, 1, mu, theta).unwrap();
                assert!(rel(m, product) < 1e-9, "l={l} θ={theta}: {m} vs {product}");
            }
        }
    }

    #[test]
    fn single_erlang_mgf() {
        let m = mgf_max_erlang(1, 4, 2.0, 1.0).unwrap();
        assert!(rel(m, 2f64.powi(4)) < 1e-9);
    }

    #[test]
    fn job_service_and_stability_examples() {
        let p = |l, k, mu| ModelParams::new(l, k, 0.1, mu).unwrap();
        assert!((expected_job_service_tiny(&p(2, 4, 1.0)) - 2.5).abs() < 1e-12);
        assert!((expected_job_service_tiny(&p(3, 3, 1.0)) - 11.0 / 6.0).abs() < 1e-12);
        assert!((expected_job_service_tiny(&p(1, 1, 2.0)) - 0.5).abs() < 1e-12);
        assert!((stability_tiny(2, 1.0) - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(stability_tiny(1, 7.0), 1.0);
        assert!(stability_tiny(50, 1e9) > 0.999_999);
        assert!((stability_big(10, 1, 1.0).unwrap() - 1.0 / harmonic(10)).abs() < 1e-10);
        assert!((stability_big(10, 1, 1.0).unwrap() - 0.341417).abs() < 1e-6);
        assert!((stability_big(1, 5, 3.0).unwrap() - 1.0).abs() < 1e-9);
        let big = stability_big(50, 20, 1.0).unwrap();
        assert!(big < stability_tiny(50, 20.0), "{big}");
    }
}
