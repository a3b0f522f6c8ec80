//! θ-optimization shared by all bounds: locate the largest θ satisfying the
//! rate condition, then minimize the bound over the feasible interval.

const GRID_POINTS: usize = 96;
const GRID_SPAN: f64 = 1e-8;
const GOLDEN_ITERS: usize = 200;
const GOLDEN_REL_TOL: f64 = 1e-10;
const BISECT_ITERS: usize = 200;
const UNBOUNDED_CAP: f64 = 1e15;

/// Largest `θ` in `(0, theta_max)` with `slack(θ) >= 0`, where `slack` is
/// decreasing. `None` if the condition fails already near zero.
pub(crate) fn feasibility_boundary(slack: impl Fn(f64) -> f64, theta_max: f64) -> Option<f64> {
    let ok = |t: f64| {
        let g = slack(t);
        g >= 0.0 && !g.is_nan()
    };
    let upper = if theta_max.is_finite() {
        theta_max * (1.0 - 1e-9)
    } else {
        let mut t = 1.0;
        while t < UNBOUNDED_CAP && ok(t) {
            t *= 2.0;
        }
        if ok(t) {
            return Some(t);
        }
        t
    };
    let probe = upper * 1e-12;
    if !ok(probe) {
        return None;
    }
    if ok(upper) {
        return Some(upper);
    }
    let (mut lo, mut hi) = (probe, upper);
    for _ in 0..BISECT_ITERS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}

/// Minimizes `objective` over `(0, upper]`. Returns `(θ*, value)`.
pub(crate) fn minimize(objective: impl Fn(f64) -> f64, upper: f64) -> (f64, f64) {
    let f = |t: f64| {
        let v = objective(t);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let lo = upper * GRID_SPAN;
    let ratio = (upper / lo).powf(1.0 / (GRID_POINTS - 1) as f64);
    let grid: Vec<f64> = (0..GRID_POINTS)
        .map(|i| {
            if i + 1 == GRID_POINTS {
                upper
            } else {
                lo * ratio.powi(i as i32)
            }
        })
        .collect();
    let values: Vec<f64> = grid.iter().map(|&t| f(t)).collect();
    let best = (0..GRID_POINTS)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .expect("grid is not empty");
    let mut result = (grid[best], values[best]);
    let a = grid[best.saturating_sub(1)];
    let b = grid[(best + 1).min(GRID_POINTS - 1)];
    let golden = golden_section(&f, a, b);
    if golden.1 < result.1 {
        result = golden;
    }
    result
}

fn golden_section(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..GOLDEN_ITERS {
        if (b - a).abs() <= GOLDEN_REL_TOL * 0.5 * (a + b).abs() {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}
