use std::cell::Cell;

use crate::{Error, Result};

const MAX_DEPTH: u32 = 50;
const MAX_SUBDIVISIONS: u64 = 2_000_000;
const PANELS: usize = 64;
const COARSE_INTERVALS: usize = 2048;

/// Adaptive Simpson integration of `f` over `[a, b]` to relative tolerance
/// `rel_tol`.
///
/// The interval is split into fixed panels first so that narrow features are
/// not missed by the initial five-point estimate; a composite Simpson pass
/// provides the scale for the absolute tolerance.
pub(crate) fn integrate<F>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(a.is_finite() && b.is_finite()) || b < a {
        return Err(Error::InvalidArgument(format!(
            "bad integration interval [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    let coarse = composite_simpson(&f, a, b, COARSE_INTERVALS);
    if !coarse.is_finite() {
        return Err(Error::Quadrature {
            lower: a,
            upper: b,
            estimate: coarse,
            error: f64::INFINITY,
            tolerance: 0.0,
        });
    }
    let tol = (rel_tol * coarse.abs()).max(f64::MIN_POSITIVE);
    let width = (b - a) / PANELS as f64;
    let mut total = 0.0;
    let budget = Cell::new(MAX_SUBDIVISIONS);
    for p in 0..PANELS {
        let lo = a + width * p as f64;
        let hi = if p + 1 == PANELS { b } else { lo + width };
        let (flo, fhi) = (f(lo), f(hi));
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        let whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
        total += adapt(
            &f,
            lo,
            hi,
            flo,
            fmid,
            fhi,
            whole,
            tol / PANELS as f64,
            0,
            &budget,
        )?;
    }
    Ok(total)
}

/// Integrates `f` over `[0, ∞)` piecewise on `[0, u0]`, `[u0, 2u0]`,
/// `[2u0, 4u0]`, ... until `done(upper, total_so_far)` holds.
pub(crate) fn integrate_half_line<F, D>(f: F, u0: f64, rel_tol: f64, done: D) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64, f64) -> bool,
{
    const MAX_PIECES: u32 = 60;
    let mut total = integrate(&f, 0.0, u0, rel_tol)?;
    let mut upper = u0;
    for _ in 0..MAX_PIECES {
        if done(upper, total) {
            return Ok(total);
        }
        total += integrate(&f, upper, 2.0 * upper, rel_tol)?;
        upper *= 2.0;
    }
    Err(Error::Quadrature {
        lower: 0.0,
        upper,
        estimate: total,
        error: f64::INFINITY,
        tolerance: rel_tol,
    })
}

#[allow(clippy::too_many_arguments)]
fn adapt<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    budget: &Cell<u64>,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let both = left + right;
    let delta = both - whole;
    let floor = 64.0 * f64::EPSILON * both.abs();
    if delta.abs() <= 15.0 * tol.max(floor) {
        return Ok(both + delta / 15.0);
    }
    let left_over = budget.get();
    if depth >= MAX_DEPTH || left_over == 0 || !delta.is_finite() {
        return Err(Error::Quadrature {
            lower: a,
            upper: b,
            estimate: both,
            error: delta.abs(),
            tolerance: tol,
        });
    }
    budget.set(left_over - 1);
    let l = adapt(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1, budget)?;
    let r = adapt(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1, budget)?;
    Ok(l + r)
}

fn composite_simpson<F>(f: &F, a: f64, b: f64, n: usize) -> f64
where
    F: Fn(f64) -> f64,
{
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + h * i as f64);
    }
    sum * h / 3.0
}
