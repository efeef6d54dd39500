//! Quadrangles generated by a divergence function `phi` and a radius `beta`.

use super::family::{minimize_over_lambda, Boundary, FamilyValue};
use super::phi::DivergenceFn;
use crate::constructions::{regret_functional_to_risk, search_step};
use crate::error::{QuadError, Result};
use crate::measures::special::expectile_unchecked;
use crate::quartet::{functional, statistic_fn, Flags, Functional, Quartet};
use crate::rv::{DiscreteRv, StatInterval};
use crate::solvers::argmin_interval_convex;

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(QuadError::param("beta", format!("must be positive, got {beta}")))
    }
}

/// `lambda E[phi*(X/lambda)]`, evaluated through a shifted exponential for KL.
fn scaled_conj(phi: &DivergenceFn, x: &DiscreteRv, lambda: f64) -> f64 {
    if phi.name == "kl" {
        // lambda (E[exp(X/lambda)] - 1) via log-sum-exp
        let m = x.ess_sup();
        let s = x.expect(|v| ((v - m) / lambda).exp());
        let log_term = lambda.ln() + m / lambda + s.ln();
        return if log_term > 700.0 { f64::INFINITY } else { log_term.exp() - lambda };
    }
    let mut acc = 0.0;
    for (v, p) in x.atoms() {
        let c = phi.conj(v / lambda);
        if c == f64::INFINITY {
            return f64::INFINITY;
        }
        acc += p * c;
    }
    lambda * acc
}

/// `V(X) = inf_{lambda>0} lambda {beta + E[phi*(X/lambda)]}` with the
/// `lambda -> 0` limit given by the recession function of `phi*`.
pub fn divergence_regret(phi: &DivergenceFn, beta: f64, x: &DiscreteRv) -> FamilyValue {
    let limit0 = x.expect(|v| phi.recession(v));
    let limit0 = if limit0.is_finite() { Some(limit0) } else { None };
    let mut fv = minimize_over_lambda(|l| l * beta + scaled_conj(phi, x, l), limit0);
    if fv.boundary == Boundary::Zero && fv.lambda > 0.0 {
        fv.value = limit0.unwrap_or(fv.value);
    }
    fv
}

/// Generic quartet: regret by the multiplier search, risk and statistic by
/// the regret formula, error and deviation by mean-centering.
pub fn generic_divergence_quadrangle(phi: &DivergenceFn, beta: f64) -> Result<Quartet> {
    check_beta(beta)?;
    let p1 = phi.clone();
    let regret = functional(move |x| divergence_regret(&p1, beta, x).value);
    let r1 = regret.clone();
    let r2 = regret.clone();
    let r3 = regret.clone();
    let risk = move |x: &DiscreteRv| regret_functional_to_risk(&r1, x).map(|p| p.value).unwrap_or(f64::NAN);
    let risk2 = risk.clone();
    Ok(Quartet::new(
        format!("{}[generic]({beta})", phi.name),
        functional(risk),
        functional(move |x| risk2(x) - x.expectation()),
        r2,
        functional(move |x| r3(x) - x.expectation()),
        statistic_fn(move |x| {
            regret_functional_to_risk(&regret, x).map(|p| p.statistic).unwrap_or(StatInterval::point(f64::NAN))
        }),
        divergence_flags(phi),
    ))
}

fn divergence_flags(phi: &DivergenceFn) -> Flags {
    Flags::new(true, phi.dom.0 >= 0.0, false, true)
}

/// EVaR: `inf_{lambda>0} lambda {beta + ln E[exp(X/lambda)]}` with the
/// minimizing multiplier (`0` when the infimum is the ess sup limit).
pub fn evar(x: &DiscreteRv, beta: f64) -> (f64, f64) {
    let m = x.ess_sup();
    if x.is_constant() {
        return (m, 0.0);
    }
    // derivative of the convex objective in lambda
    let deriv = |l: f64| {
        let w: Vec<f64> = x.values().iter().zip(x.probs()).map(|(v, p)| p * ((v - m) / l).exp()).collect();
        let s: f64 = w.iter().sum();
        let sx: f64 = w.iter().zip(x.values()).map(|(a, v)| a * v).sum();
        beta + s.ln() + (m - sx / s) / l
    };
    let value = |l: f64| {
        let s = x.expect(|v| ((v - m) / l).exp());
        l * (beta + s.ln()) + m
    };
    let p_top = x.probs()[x.len() - 1];
    if beta + p_top.ln() >= 0.0 {
        return (m, 0.0);
    }
    let span = m - x.ess_inf();
    let mut lo = span * 1e-3;
    while deriv(lo) >= 0.0 {
        lo *= 0.5;
    }
    let mut hi = span;
    while deriv(hi) <= 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if deriv(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let l = 0.5 * (lo + hi);
    (value(l), l)
}

/// Residual of the EVaR stationarity equation at `lambda`.
pub fn evar_stationarity(x: &DiscreteRv, beta: f64, lambda: f64) -> f64 {
    let m = x.ess_sup();
    let s = x.expect(|v| ((v - m) / lambda).exp());
    let sx = x.expect(|v| v * ((v - m) / lambda).exp());
    lambda * beta + lambda * s.ln() + m - sx / s
}

/// The quartet with the printed closed forms where they exist.
pub fn divergence_quadrangle(phi: &DivergenceFn, beta: f64) -> Result<Quartet> {
    check_beta(beta)?;
    let flags = divergence_flags(phi);
    let q = match phi.name.as_str() {
        "kl" => {
            let p1 = phi.clone();
            let p2 = phi.clone();
            Quartet::new(
                format!("kl({beta})"),
                functional(move |x| evar(x, beta).0),
                functional(move |x| evar(x, beta).0 - x.expectation()),
                functional(move |x| divergence_regret(&p1, beta, x).value),
                functional(move |x| divergence_regret(&p2, beta, x).value - x.expectation()),
                statistic_fn(move |x| {
                    let (r, l) = evar(x, beta);
                    if l == 0.0 {
                        return StatInterval::point(r);
                    }
                    let m = x.ess_sup();
                    StatInterval::point(m + l * x.expect(|v| ((v - m) / l).exp()).ln())
                }),
                flags,
            )
        }
        "tv" => {
            if beta >= 2.0 {
                return Err(QuadError::param("beta", format!("total variation needs beta in (0, 2), got {beta}")));
            }
            let h = beta / 2.0;
            let risk = move |x: &DiscreteRv| h * x.ess_sup() + (1.0 - h) * x.cvar(h);
            Quartet::new(
                format!("tv({beta})"),
                functional(risk),
                functional(move |x| risk(x) - x.expectation()),
                functional(move |x| tv_regret(x, beta)),
                functional(move |x| tv_regret(x, beta) - x.expectation()),
                statistic_fn(move |x| x.var(h).shift(x.ess_sup()).scale(0.5)),
                flags,
            )
        }
        "pearson" => {
            let c = beta + 1.0;
            let regret = functional(move |x| (c * x.expect(|v| v.max(0.0).powi(2))).sqrt());
            let r1 = regret.clone();
            let r2 = regret.clone();
            let r3 = regret.clone();
            let risk = move |x: &DiscreteRv| pearson_risk(&r1, x).1;
            Quartet::new(
                format!("pearson({beta})"),
                functional(risk.clone()),
                functional(move |x| risk(x) - x.expectation()),
                r2,
                functional(move |x| r3(x) - x.expectation()),
                statistic_fn(move |x| pearson_risk(&regret, x).0),
                flags,
            )
        }
        "extended_pearson" => {
            let t = beta.sqrt();
            Quartet::new(
                format!("extended_pearson({beta})"),
                functional(move |x| x.expectation() + t * x.std_dev()),
                functional(move |x| t * x.std_dev()),
                functional(move |x| x.expectation() + t * x.l2_norm()),
                functional(move |x| t * x.l2_norm()),
                statistic_fn(|x| StatInterval::point(x.expectation())),
                flags,
            )
        }
        "gen_extended_pearson" => {
            let q = gen_pearson_level(phi)?;
            let err = move |x: &DiscreteRv| {
                (beta * x.expect(|v| q * v.max(0.0).powi(2) + (1.0 - q) * (-v).max(0.0).powi(2))).sqrt()
            };
            let dev = move |x: &DiscreteRv| err(&x.shift(-expectile_unchecked(x, q)));
            Quartet::new(
                format!("gen_extended_pearson({q}, {beta})"),
                functional(move |x| dev(x) + x.expectation()),
                functional(dev),
                functional(move |x| err(x) + x.expectation()),
                functional(err),
                statistic_fn(move |x| StatInterval::point(expectile_unchecked(x, q))),
                flags,
            )
        }
        _ => generic_divergence_quadrangle(phi, beta)?,
    };
    Ok(q)
}

/// Recover `q` from the registry entry by probing the conjugate curvature.
fn gen_pearson_level(phi: &DivergenceFn) -> Result<f64> {
    // phi*(2) = q + 2 for this family
    let q = phi.conj(2.0) - 2.0;
    if q > 0.0 && q < 1.0 {
        Ok(q)
    } else {
        Err(QuadError::Invalid("not a generalized extended Pearson divergence".into()))
    }
}

/// `inf_{lambda > 0, lambda >= ess sup X} lambda (beta - 1) + E[X + lambda]_+`,
/// exact over the breakpoints of the piecewise linear objective.
pub fn tv_regret(x: &DiscreteRv, beta: f64) -> f64 {
    let l0 = x.ess_sup().max(0.0);
    let h = |l: f64| l * (beta - 1.0) + x.expect(|v| (v + l).max(0.0));
    let mut best = h(l0);
    for &v in x.values() {
        if -v > l0 {
            best = best.min(h(-v));
        }
    }
    best
}

fn pearson_risk(regret: &Functional, x: &DiscreteRv) -> (StatInterval, f64) {
    argmin_interval_convex(|c| c + regret(&x.shift(-c)), x.expectation(), search_step(x))
        .unwrap_or((StatInterval::point(f64::NAN), f64::NAN))
}
