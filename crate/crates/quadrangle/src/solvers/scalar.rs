//! One-dimensional convex minimization and argmin intervals.

use crate::error::{QuadError, Result};
use crate::rv::StatInterval;

pub const GOLDEN_TOL: f64 = 1e-10;
const INV_PHI: f64 = 0.618_033_988_749_894_9;
const BRACKET_CAP: f64 = 1_152_921_504_606_846_976.0; // 2^60

/// Sublevel slack used to locate argmin endpoints, relative to `1 + |min|`.
pub const FLAT_TOL: f64 = 1e-11;

#[inline]
fn clean(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Golden-section search on `[a, b]`. Returns the best point seen and its value.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let (mut a, mut b) = if a <= b { (a, b) } else { (b, a) };
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = clean(f(c));
    let mut fd = clean(f(d));
    let mut best = if fc <= fd { (c, fc) } else { (d, fd) };
    for _ in 0..400 {
        if (b - a).abs() <= tol * (1.0 + c.abs().max(d.abs())) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = clean(f(c));
            if fc < best.1 {
                best = (c, fc);
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = clean(f(d));
            if fd < best.1 {
                best = (d, fd);
            }
        }
    }
    best
}

/// Expand around `x0` until the minimizer of a convex `f` is strictly inside.
/// Returns `(a, c, b)` with `f(c) < f(a)` and `f(c) < f(b)`.
pub fn bracket_minimum<F: Fn(f64) -> f64>(f: &F, x0: f64, step: f64) -> Result<(f64, f64, f64)> {
    let mut c = x0;
    let mut fc = clean(f(c));
    let mut s = if step > 0.0 && step.is_finite() { step } else { 1.0 };
    while s <= BRACKET_CAP * (1.0 + x0.abs()) {
        let a = c - s;
        let b = c + s;
        let fa = clean(f(a));
        let fb = clean(f(b));
        if fa > fc && fb > fc {
            return Ok((a, c, b));
        }
        if fa < fc || fb < fc {
            if fa <= fb {
                c = a;
                fc = fa;
            } else {
                c = b;
                fc = fb;
            }
        }
        s *= 2.0;
    }
    if fc.is_infinite() {
        return Err(QuadError::Unbounded("no finite value found while bracketing".into()));
    }
    Err(QuadError::Unbounded(format!("no bracket for the minimum near {c}; function unbounded below or argmin unbounded")))
}

/// Minimize a convex scalar function, bracketing automatically from `x0`.
pub fn minimize_scalar<F: Fn(f64) -> f64>(f: F, x0: f64, step: f64) -> Result<(f64, f64)> {
    let (a, c, b) = bracket_minimum(&f, x0, step)?;
    let fc = clean(f(c));
    let (x, v) = golden_section(&f, a, b, GOLDEN_TOL);
    Ok(if fc < v { (c, fc) } else { (x, v) })
}

/// Boundary of a monotone predicate: `pred(a)` false and `pred(b)` true.
/// Returns a point within rounding of the switch.
pub fn bisect_boundary<P: Fn(f64) -> bool>(pred: P, mut a: f64, mut b: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        if pred(m) {
            b = m;
        } else {
            a = m;
        }
    }
    0.5 * (a + b)
}

/// Argmin interval of a convex function of one variable.
///
/// The endpoints of a flat bottom are found as sublevel-set boundaries; a
/// bottom that is not flat is resolved to a single point by bisecting on the
/// sign of a symmetric difference.
pub fn argmin_interval_convex<F: Fn(f64) -> f64>(f: F, x0: f64, step: f64) -> Result<(StatInterval, f64)> {
    let f = |c: f64| clean(f(c));
    let (a, c, b) = bracket_minimum(&f, x0, step)?;
    let fc = f(c);
    let (mut xm, mut m) = golden_section(f, a, b, 1e-13);
    if fc < m {
        xm = c;
        m = fc;
    }
    if !m.is_finite() {
        return Err(QuadError::Unbounded("function is infinite on the bracket".into()));
    }
    let eta = FLAT_TOL * (1.0 + m.abs());
    // the bracket may end inside a flat stretch of minimizers
    let (mut a, mut b) = (a, b);
    let mut s = (b - a).max(step.abs()).max(1e-300);
    while f(a) <= m + eta && s < BRACKET_CAP {
        a = xm - s;
        s *= 2.0;
    }
    let mut s = (b - a).max(step.abs()).max(1e-300);
    while f(b) <= m + eta && s < BRACKET_CAP {
        b = xm + s;
        s *= 2.0;
    }
    let l = bisect_boundary(|t| f(t) <= m + eta, a, xm);
    let u = bisect_boundary(|t| f(t) > m + eta, xm, b);
    let width = u - l;
    if width <= 1e-15 * (1.0 + xm.abs()) {
        return Ok((StatInterval::point(xm), m));
    }
    let probes: Vec<f64> = (1..=5).map(|j| f(l + width * j as f64 / 6.0)).collect();
    let flat = probes.iter().all(|&v| v <= m + eta / 100.0);
    if flat {
        let m_flat = probes.iter().copied().fold(m, f64::min);
        let eta_s = 1e-13 * (1.0 + m_flat.abs());
        let t1 = l + width / 6.0;
        let t5 = l + width * 5.0 / 6.0;
        let lo = bisect_boundary(|t| f(t) <= m_flat + eta_s, a, t1);
        let hi = bisect_boundary(|t| f(t) > m_flat + eta_s, t5, b);
        return Ok((StatInterval::new(lo, hi), m_flat));
    }
    let h = 0.5 * width;
    let slope_sign = |t: f64| {
        let d = f(t + h) - f(t - h);
        if d.is_nan() {
            0.0
        } else {
            d
        }
    };
    let (mut lo, mut hi) = (l, u);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let d = slope_sign(mid);
        if d < 0.0 {
            lo = mid;
        } else if d > 0.0 {
            hi = mid;
        } else {
            lo = mid;
            hi = mid;
            break;
        }
    }
    let p = 0.5 * (lo + hi);
    Ok((StatInterval::point(p), m.min(f(p))))
}

/// Argmin interval of a convex piecewise-linear function whose kinks all lie
/// in `breakpoints`. Exact up to rounding in the function values.
pub fn argmin_interval_pwl<F: Fn(f64) -> f64>(f: F, breakpoints: &[f64]) -> Result<(StatInterval, f64)> {
    let mut bp: Vec<f64> = breakpoints.iter().copied().filter(|b| b.is_finite()).collect();
    if bp.is_empty() {
        return Err(QuadError::Invalid("no breakpoints".into()));
    }
    bp.sort_by(f64::total_cmp);
    bp.dedup();
    let vals: Vec<f64> = bp.iter().map(|&b| clean(f(b))).collect();
    let m = vals.iter().copied().fold(f64::INFINITY, f64::min);
    if !m.is_finite() {
        return Err(QuadError::Unbounded("function infinite at every breakpoint".into()));
    }
    let span = (bp[bp.len() - 1] - bp[0]).max(1.0);
    let tol = 1e-12 * (1.0 + m.abs());
    let left = clean(f(bp[0] - span));
    let right = clean(f(bp[bp.len() - 1] + span));
    if left < vals[0] - tol || right < vals[vals.len() - 1] - tol {
        return Err(QuadError::Unbounded("piecewise-linear function decreases past the outer breakpoints".into()));
    }
    let first = vals.iter().position(|&v| v <= m + tol).unwrap();
    let last = vals.iter().rposition(|&v| v <= m + tol).unwrap();
    if (first == 0 && left <= m + tol) || (last == bp.len() - 1 && right <= m + tol) {
        return Err(QuadError::Unbounded("argmin set is unbounded".into()));
    }
    Ok((StatInterval::new(bp[first], bp[last]), m))
}

/// Minimize a function that is unimodal on `[lo, hi]` by a coarse grid scan
/// followed by golden-section refinement between the neighbours of the best
/// grid point. Robust to `+inf` on part of the interval.
pub fn minimize_unimodal<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, grid: usize) -> (f64, f64) {
    let n = grid.max(3);
    let h = (hi - lo) / (n - 1) as f64;
    let mut best = (lo, f64::INFINITY);
    let mut k_best = 0;
    for k in 0..n {
        let t = lo + h * k as f64;
        let v = clean(f(t));
        if v < best.1 {
            best = (t, v);
            k_best = k;
        }
    }
    let a = lo + h * k_best.saturating_sub(1) as f64;
    let b = lo + h * (k_best + 1).min(n - 1) as f64;
    let (t, v) = golden_section(&f, a, b, 1e-12);
    if v < best.1 {
        (t, v)
    } else {
        best
    }
}
