//! Closed-form building blocks: expectiles, integrated CVaR, symmetric
//! quantile averages and the insensitive-loss level set.

use crate::error::{QuadError, Result};
use crate::rv::{merge_intervals, DiscreteRv, StatInterval, LEVEL_TOL};

/// The expectile `e_q`: the root of `q E[(X-C)+] = (1-q) E[(X-C)-]`, solved
/// exactly on the segment between atoms where the sign changes.
pub fn expectile_value(x: &DiscreteRv, q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(QuadError::param("q", format!("expectile level must lie in (0, 1), got {q}")));
    }
    Ok(expectile_unchecked(x, q))
}

pub(crate) fn expectile_unchecked(x: &DiscreteRv, q: f64) -> f64 {
    let v = x.values();
    let p = x.probs();
    let n = v.len();
    if n == 1 {
        return v[0];
    }
    let h = |c: f64| q * x.expect(|t| (t - c).max(0.0)) - (1.0 - q) * x.expect(|t| (c - t).max(0.0));
    // h is decreasing; find the segment [v[k], v[k+1]] with h(v[k]) >= 0 >= h(v[k+1])
    let mut k = 0;
    while k + 1 < n - 1 && h(v[k + 1]) > 0.0 {
        k += 1;
    }
    // on the segment, atoms 0..=k lie below C and k+1.. above
    let (mut below_p, mut below_px) = (0.0, 0.0);
    for i in 0..=k {
        below_p += p[i];
        below_px += p[i] * v[i];
    }
    let (mut above_p, mut above_px) = (0.0, 0.0);
    for i in (k + 1)..n {
        above_p += p[i];
        above_px += p[i] * v[i];
    }
    let c = (q * above_px + (1.0 - q) * below_px) / (q * above_p + (1.0 - q) * below_p);
    c.clamp(v[k], v[k + 1])
}

/// CVaR as a function of the level on each atom segment:
/// `CVaR_b = x_k + c_k / (1 - b)` for `b` in `[F_{k-1}, F_k]`.
fn cvar_segments(x: &DiscreteRv) -> Vec<(f64, f64, f64, f64)> {
    let v = x.values();
    let p = x.probs();
    let n = v.len();
    let mut tail = vec![0.0; n + 1];
    for k in (0..n).rev() {
        tail[k] = tail[k + 1] + p[k] * v[k];
    }
    let mut out = Vec::with_capacity(n);
    let mut f_prev = 0.0;
    let mut mass_above = 1.0;
    for k in 0..n {
        mass_above -= p[k];
        let f_k = if k + 1 == n { 1.0 } else { f_prev + p[k] };
        // c_k = sum_{j>k} p_j (x_j - x_k)
        let c = if k + 1 == n { 0.0 } else { tail[k + 1] - v[k] * mass_above.max(0.0) };
        out.push((f_prev, f_k, v[k], c.max(0.0)));
        f_prev = f_k;
    }
    out
}

fn seg_integral(val: f64, c: f64, s: f64, t: f64) -> f64 {
    if t <= s {
        return 0.0;
    }
    let log_term = if c == 0.0 { 0.0 } else { c * ((1.0 - s) / (1.0 - t)).ln() };
    val * (t - s) + log_term
}

/// `int_a^b CVaR_beta(X) d beta` for `0 <= a <= b <= 1`, in closed form.
pub fn cvar_integral(x: &DiscreteRv, a: f64, b: f64) -> f64 {
    cvar_segments(x)
        .into_iter()
        .map(|(s, t, val, c)| seg_integral(val, c, s.max(a), t.min(b)))
        .sum()
}

/// `int_0^1 [CVaR_beta(X)]+ d beta`, in closed form.
pub fn cvar_positive_integral(x: &DiscreteRv) -> f64 {
    let mut acc = 0.0;
    for (s, t, val, c) in cvar_segments(x) {
        if t <= s {
            continue;
        }
        let at = |b: f64| if b >= 1.0 { if c > 0.0 { f64::INFINITY } else { val } } else { val + c / (1.0 - b) };
        if at(s) >= 0.0 {
            acc += seg_integral(val, c, s, t);
        } else if at(t) > 0.0 {
            // val < 0 < c: zero at b0 = 1 + c / val
            let b0 = (1.0 + c / val).clamp(s, t);
            acc += seg_integral(val, c, b0, t);
        }
    }
    acc
}

/// Second-order superquantile `(1/(1-a)) int_a^1 CVaR_beta d beta`.
pub fn cvar2_risk(x: &DiscreteRv, alpha: f64) -> f64 {
    if alpha >= 1.0 {
        return x.ess_sup();
    }
    cvar_integral(x, alpha, 1.0) / (1.0 - alpha)
}

/// `(1+a)/2 CVaR_{(1-a)/2} + (1-a)/2 CVaR_{(1+a)/2}`.
pub fn qsa_risk(x: &DiscreteRv, alpha: f64) -> f64 {
    0.5 * ((1.0 + alpha) * x.cvar(0.5 * (1.0 - alpha)) + (1.0 - alpha) * x.cvar(0.5 * (1.0 + alpha)))
}

/// Symmetric quantile average `(VaR_{(1-a)/2} + VaR_{(1+a)/2}) / 2` as an interval.
pub fn qsa_statistic(x: &DiscreteRv, alpha: f64) -> StatInterval {
    x.var(0.5 * (1.0 - alpha)).add(&x.var(0.5 * (1.0 + alpha))).scale(0.5)
}

/// The CVaR norm `(1-a) CVaR_a(|X|)`.
pub fn cvar_norm(x: &DiscreteRv, alpha: f64) -> f64 {
    (1.0 - alpha) * x.abs().cvar(alpha)
}

/// Half-spread interval `(VaR_{(1+a)/2} - VaR_{(1-a)/2}) / 2`.
fn half_spread(x: &DiscreteRv, alpha: f64) -> StatInterval {
    let l = x.var(0.5 * (1.0 - alpha));
    let u = x.var(0.5 * (1.0 + alpha));
    StatInterval::new(0.5 * (u.lo - l.hi), 0.5 * (u.hi - l.lo))
}

fn level_breakpoints(x: &DiscreteRv) -> Vec<f64> {
    let mut cum = 0.0;
    let mut out = vec![0.0];
    for &p in x.probs() {
        cum += p;
        if cum > LEVEL_TOL && cum < 1.0 - LEVEL_TOL {
            for a in [2.0 * cum - 1.0, 1.0 - 2.0 * cum] {
                if (0.0..1.0).contains(&a) {
                    out.push(a);
                }
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() <= LEVEL_TOL);
    out
}

/// Checks `0 <= eps < (ess sup - ess inf) / 2`.
pub fn qsau_precondition(x: &DiscreteRv, eps: f64) -> Result<()> {
    let (lo, hi) = x.ess_bounds();
    if !(eps >= 0.0) || eps >= 0.5 * (hi - lo) {
        return Err(QuadError::param(
            "eps",
            format!("need 0 <= eps < (ess sup - ess inf)/2 = {}, got {eps}", 0.5 * (hi - lo)),
        ));
    }
    Ok(())
}

/// Levels `alpha` in `[0, 1)` with `eps` inside the half-spread interval, as
/// a sorted union of closed intervals. An interval reaching 1 excludes 1.
pub fn qsau_alpha_set(x: &DiscreteRv, eps: f64) -> Vec<StatInterval> {
    let bps = level_breakpoints(x);
    let tol = 1e-12 * (1.0 + eps.abs());
    let member = |a: f64| half_spread(x, a).contains(eps, tol);
    let mut parts = Vec::new();
    for (i, &b) in bps.iter().enumerate() {
        if member(b) {
            parts.push(StatInterval::point(b));
        }
        let next = bps.get(i + 1).copied().unwrap_or(1.0);
        if member(0.5 * (b + next)) {
            parts.push(StatInterval::new(b, next));
        }
    }
    merge_intervals(parts, LEVEL_TOL)
}

/// Representative levels of the set: every breakpoint it contains and the
/// midpoint of every open segment it contains.
pub fn qsau_alpha_samples(x: &DiscreteRv, eps: f64) -> Vec<f64> {
    let bps = level_breakpoints(x);
    let tol = 1e-12 * (1.0 + eps.abs());
    let member = |a: f64| half_spread(x, a).contains(eps, tol);
    let mut out = Vec::new();
    for (i, &b) in bps.iter().enumerate() {
        if member(b) {
            out.push(b);
        }
        let next = bps.get(i + 1).copied().unwrap_or(1.0);
        let mid = 0.5 * (b + next);
        if member(mid) {
            out.push(mid);
        }
    }
    out
}

/// Union over levels in the set of the symmetric averages `(q1 + q2)/2` with
/// `q1` in `VaR_{(1-a)/2}`, `q2` in `VaR_{(1+a)/2}` and `q2 - q1 = 2 eps`.
pub fn qsau_statistic_union(x: &DiscreteRv, eps: f64) -> Vec<StatInterval> {
    let tol = 1e-12 * (1.0 + eps.abs());
    let parts: Vec<StatInterval> = qsau_alpha_samples(x, eps)
        .into_iter()
        .filter_map(|a| {
            let l = x.var(0.5 * (1.0 - a));
            let u = x.var(0.5 * (1.0 + a));
            let lo = l.lo.max(u.lo - 2.0 * eps);
            let hi = l.hi.min(u.hi - 2.0 * eps);
            (lo <= hi + tol).then(|| StatInterval::new(lo + eps, hi.max(lo) + eps))
        })
        .collect();
    merge_intervals(parts, 1e-12)
}

/// `(1+a)/2 CVaR_{(1-a)/2} + (1-a)/2 CVaR_{(1+a)/2} - (1-a) eps` at the
/// first level of the set.
pub fn qsau_risk(x: &DiscreteRv, eps: f64) -> Result<f64> {
    qsau_precondition(x, eps)?;
    let a = qsau_alpha_samples(x, eps)
        .first()
        .copied()
        .ok_or_else(|| QuadError::Invalid("empty level set".into()))?;
    Ok(qsa_risk(x, a) - (1.0 - a) * eps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expectile_of_bernoulli() {
        let x = DiscreteRv::uniform(&[0.0, 1.0]).unwrap();
        assert!((expectile_value(&x, 0.75).unwrap() - 0.75).abs() < 1e-15);
        assert!((expectile_value(&x, 0.5).unwrap() - 0.5).abs() < 1e-15);
        assert!(expectile_value(&x, 1.0).is_err());
    }

    #[test]
    fn expectile_defining_equation() {
        let x = DiscreteRv::new(&[-1.0, 0.2, 3.0, 7.5], &[0.1, 0.4, 0.3, 0.2]).unwrap();
        for q in [0.05, 0.3, 0.5, 0.9, 0.99] {
            let c = expectile_value(&x, q).unwrap();
            let lhs = q * x.expect(|t| (t - c).max(0.0));
            let rhs = (1.0 - q) * x.expect(|t| (c - t).max(0.0));
            assert!((lhs - rhs).abs() < 1e-13, "q={q}");
        }
    }

    fn cvar_integral_by_simpson(x: &DiscreteRv, a: f64, b: f64, pos: bool) -> f64 {
        let n = 200_000;
        let h = (b - a) / n as f64;
        let g = |t: f64| {
            let c = x.cvar(t.min(1.0 - 1e-15));
            if pos {
                c.max(0.0)
            } else {
                c
            }
        };
        let mut s = g(a) + g(b);
        for i in 1..n {
            s += g(a + h * i as f64) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn closed_form_integrals_match_quadrature() {
        let x = DiscreteRv::new(&[-2.0, -0.5, 1.0, 4.0], &[0.2, 0.3, 0.4, 0.1]).unwrap();
        let exact = cvar_integral(&x, 0.3, 1.0);
        assert!((exact - cvar_integral_by_simpson(&x, 0.3, 1.0, false)).abs() < 1e-6);
        let pos = cvar_positive_integral(&x);
        assert!((pos - cvar_integral_by_simpson(&x, 0.0, 1.0, true)).abs() < 1e-6);
        // full integral of CVaR over [0, 1] equals E[X] + E[X ln(1/(1-F))]-type constant; check additivity
        let whole = cvar_integral(&x, 0.0, 1.0);
        assert!((whole - cvar_integral(&x, 0.0, 0.45) - cvar_integral(&x, 0.45, 1.0)).abs() < 1e-13);
    }

    #[test]
    fn qsau_levels_for_symmetric_pair() {
        let x = DiscreteRv::uniform(&[-2.0, 2.0]).unwrap();
        let set = qsau_alpha_set(&x, 1.0);
        assert_eq!(set, vec![StatInterval::point(0.0)]);
        let u = qsau_statistic_union(&x, 1.0);
        assert_eq!(u, vec![StatInterval::new(-1.0, 1.0)]);
        assert!((qsau_risk(&x, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(qsau_risk(&x, 2.0).is_err());
    }
}
