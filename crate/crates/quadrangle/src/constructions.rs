//! Building quadrangles: from errors and regrets, from scalar losses, from
//! coherent risks, and by mixing, reverting and scaling existing ones.

use std::sync::Arc;

use crate::error::{QuadError, Result};
use crate::loss::{PwlError, ScalarLoss};
use crate::quartet::{functional, statistic_fn, Flags, Functional, Quartet};
use crate::rv::{DiscreteRv, StatInterval};
use crate::sampling;
use crate::solvers::{
    argmin_interval_convex, argmin_interval_pwl, bisect_boundary, minimize_convex, minimize_scalar, ConvexOptions,
};

/// An error functional, optionally carrying the structure that generated it.
#[derive(Clone)]
pub struct ErrorFn {
    pub label: String,
    eval: Functional,
    pub loss: Option<ScalarLoss>,
    pub pwl: Option<PwlError>,
    pub declared: Option<Flags>,
}

/// A regret functional. `loss` is the error loss `e`; the regret integrand is `x + e(x)`.
#[derive(Clone)]
pub struct RegretFn {
    pub label: String,
    eval: Functional,
    pub loss: Option<ScalarLoss>,
    pub pwl: Option<PwlError>,
    pub declared: Option<Flags>,
}

impl ErrorFn {
    pub fn new(label: impl Into<String>, eval: Functional) -> Self {
        ErrorFn { label: label.into(), eval, loss: None, pwl: None, declared: None }
    }

    /// `E[e(X)]`.
    pub fn from_loss(loss: ScalarLoss) -> Self {
        let e = loss.value_fn();
        let pwl = loss.pieces().map(|p| PwlError::single(p.to_vec()));
        ErrorFn {
            label: loss.name.clone(),
            eval: functional(move |x| x.expect(|v| e(v))),
            loss: Some(loss),
            pwl,
            declared: None,
        }
    }

    pub fn from_pwl(label: impl Into<String>, pwl: PwlError) -> Self {
        let p = pwl.clone();
        ErrorFn {
            label: label.into(),
            eval: functional(move |x| p.value(x.values(), x.probs())),
            loss: None,
            pwl: Some(pwl),
            declared: None,
        }
    }

    pub fn with_flags(mut self, flags: Flags) -> Self {
        self.declared = Some(flags);
        self
    }

    pub fn with_pwl(mut self, pwl: PwlError) -> Self {
        self.pwl = Some(pwl);
        self
    }

    pub fn value(&self, x: &DiscreteRv) -> f64 {
        (self.eval)(x)
    }

    pub fn functional(&self) -> Functional {
        self.eval.clone()
    }
}

impl RegretFn {
    pub fn new(label: impl Into<String>, eval: Functional) -> Self {
        RegretFn { label: label.into(), eval, loss: None, pwl: None, declared: None }
    }

    pub fn with_flags(mut self, flags: Flags) -> Self {
        self.declared = Some(flags);
        self
    }

    pub fn value(&self, x: &DiscreteRv) -> f64 {
        (self.eval)(x)
    }

    pub fn functional(&self) -> Functional {
        self.eval.clone()
    }
}

/// `V = E + E[X]`.
pub fn error_to_regret(err: &ErrorFn) -> RegretFn {
    let e = err.eval.clone();
    RegretFn {
        label: format!("regret[{}]", err.label),
        eval: functional(move |x| e(x) + x.expectation()),
        loss: err.loss.clone(),
        pwl: err.pwl.as_ref().map(PwlError::to_regret),
        declared: err.declared,
    }
}

/// `E = V - E[X]`.
pub fn regret_to_error(reg: &RegretFn) -> ErrorFn {
    let v = reg.eval.clone();
    let pwl = reg.pwl.as_ref().map(|p| PwlError {
        terms: p
            .terms
            .iter()
            .map(|t| crate::loss::PwlTerm {
                pieces: t.pieces.iter().map(|&(a, b)| (a - 1.0, b)).collect(),
                constant: t.constant,
            })
            .collect(),
    });
    ErrorFn {
        label: format!("error[{}]", reg.label),
        eval: functional(move |x| v(x) - x.expectation()),
        loss: reg.loss.clone(),
        pwl,
        declared: reg.declared,
    }
}

/// Optimal value and argmin interval of a shift problem.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Projection {
    pub value: f64,
    pub statistic: StatInterval,
}

/// Natural search step for shifts of `x`.
pub(crate) fn search_step(x: &DiscreteRv) -> f64 {
    let (lo, hi) = x.ess_bounds();
    let s = 0.5 * (hi - lo);
    if s > 0.0 {
        s
    } else {
        1.0
    }
}

/// `{C : E[d_left(X - C)] <= target <= E[d_right(X - C)]}` for nondecreasing
/// one-sided derivatives. Exact up to bisection resolution.
pub fn derivative_statistic<L, R>(x: &DiscreteRv, d_left: L, d_right: R, target: f64) -> Result<StatInterval>
where
    L: Fn(f64) -> f64,
    R: Fn(f64) -> f64,
{
    let gl = |c: f64| x.expect(|v| d_left(v - c));
    let gr = |c: f64| x.expect(|v| d_right(v - c));
    let m = x.expectation();
    let scale = 1.0 + target.abs() + x.expect(|v| d_left(v - m).abs() + d_right(v - m).abs());
    let tol = 8.0 * (x.len() + 1) as f64 * f64::EPSILON * scale;
    let (inf, sup) = x.ess_bounds();
    let mut step = 1.0 + 0.5 * (sup - inf);
    let mut left = inf - step;
    while gl(left) <= target + tol {
        step *= 2.0;
        left = inf - step;
        if step > 1e18 {
            return Err(QuadError::Axiom { kind: "error", reason: "statistic unbounded below".into() });
        }
    }
    step = 1.0 + 0.5 * (sup - inf);
    let mut right = sup + step;
    while gr(right) >= target - tol {
        step *= 2.0;
        right = sup + step;
        if step > 1e18 {
            return Err(QuadError::Axiom { kind: "error", reason: "statistic unbounded above".into() });
        }
    }
    let lo = bisect_boundary(|c| gl(c) <= target + tol, left, right);
    let hi = bisect_boundary(|c| gr(c) < target - tol, left, right);
    Ok(StatInterval::new(lo, hi))
}

fn pwl_breakpoints(x: &DiscreteRv, pieces: &[(f64, f64)]) -> Option<Vec<f64>> {
    let loss = ScalarLoss::from_pieces("pwl", pieces.to_vec()).ok()?;
    let kinks = loss.kinks();
    if kinks.is_empty() {
        return None;
    }
    Some(x.values().iter().flat_map(|v| kinks.iter().map(move |k| v - k)).collect())
}

/// Minimize `C -> f(X - C) + plus * C` over shifts.
fn minimize_over_shift(
    f: &(dyn Fn(&DiscreteRv) -> f64 + Send + Sync),
    x: &DiscreteRv,
    plus: f64,
    breakpoints: Option<Vec<f64>>,
) -> Result<Projection> {
    let g = |c: f64| f(&x.shift(-c)) + plus * c;
    let (statistic, value) = match breakpoints {
        Some(bp) => argmin_interval_pwl(g, &bp)?,
        None => argmin_interval_convex(g, x.expectation(), search_step(x))?,
    };
    Ok(Projection { value, statistic })
}

/// Deviation and statistic of an error: `D(X) = min_C E(X - C)` and its argmin.
pub fn project_error(err: &ErrorFn, x: &DiscreteRv) -> Result<Projection> {
    if let Some(loss) = &err.loss {
        let s = derivative_statistic(x, |z| loss.left_derivative(z), |z| loss.right_derivative(z), 0.0)?;
        let value = err.value(&x.shift(-s.lo)).min(err.value(&x.shift(-s.hi)));
        return Ok(Projection { value, statistic: s });
    }
    let bp = match &err.pwl {
        Some(p) if p.terms.len() == 1 => pwl_breakpoints(x, &p.terms[0].pieces),
        _ => None,
    };
    minimize_over_shift(&*err.eval, x, 0.0, bp)
}

/// Risk and statistic of a regret: `R(X) = min_C {C + V(X - C)}` and its argmin.
pub fn regret_to_risk(reg: &RegretFn, x: &DiscreteRv) -> Result<Projection> {
    if let Some(loss) = &reg.loss {
        let s = derivative_statistic(
            x,
            |z| 1.0 + loss.left_derivative(z),
            |z| 1.0 + loss.right_derivative(z),
            1.0,
        )?;
        let at = |c: f64| c + reg.value(&x.shift(-c));
        return Ok(Projection { value: at(s.lo).min(at(s.hi)), statistic: s });
    }
    let bp = match &reg.pwl {
        Some(p) if p.terms.len() == 1 => pwl_breakpoints(x, &p.terms[0].pieces),
        _ => None,
    };
    minimize_over_shift(&*reg.eval, x, 1.0, bp)
}

/// Generic regret route for a bare functional.
pub fn regret_functional_to_risk(regret: &Functional, x: &DiscreteRv) -> Result<Projection> {
    minimize_over_shift(&**regret, x, 1.0, None)
}

/// Generic error route for a bare functional.
pub fn error_functional_to_deviation(error: &Functional, x: &DiscreteRv) -> Result<Projection> {
    minimize_over_shift(&**error, x, 0.0, None)
}

const AXIOM_TOL: f64 = 1e-10;

/// Sampled check of the subregular error axioms: `E(0) = 0`, non-negativity,
/// convexity on random pairs, and positivity along every sampled direction
/// for some scaling.
pub fn validate_error(err: &ErrorFn) -> Result<()> {
    let zero = err.value(&DiscreteRv::constant(0.0));
    if zero.abs() > AXIOM_TOL {
        return Err(QuadError::Axiom { kind: "error", reason: format!("E(0) = {zero}, expected 0") });
    }
    for (p, xs, ys) in sampling::random_pairs(11, 40, 4, -3.0, 3.0) {
        let x = DiscreteRv::from_scenarios(&xs, &p);
        let y = DiscreteRv::from_scenarios(&ys, &p);
        let mid: Vec<f64> = xs.iter().zip(&ys).map(|(a, b)| 0.5 * (a + b)).collect();
        let (ex, ey) = (err.value(&x), err.value(&y));
        let em = err.value(&DiscreteRv::from_scenarios(&mid, &p));
        if ex < -AXIOM_TOL || ey < -AXIOM_TOL {
            return Err(QuadError::Axiom { kind: "error", reason: format!("negative value at {x}") });
        }
        if em > 0.5 * (ex + ey) + AXIOM_TOL * (1.0 + ex.abs() + ey.abs()) {
            return Err(QuadError::Axiom { kind: "error", reason: format!("convexity fails between {x} and {y}") });
        }
    }
    let mut directions = vec![DiscreteRv::constant(1.0), DiscreteRv::constant(-1.0)];
    directions.extend(sampling::random_batch(12, 20, 4, -2.0, 2.0));
    for d in directions {
        let positive = (0..=20).any(|k| err.value(&d.scale(2f64.powi(k))) > 0.0);
        if !positive {
            return Err(QuadError::Axiom { kind: "error", reason: format!("E vanishes along the ray through {d}") });
        }
    }
    Ok(())
}

/// Sampled flags for an error: positive homogeneity, and monotonicity of the
/// induced regret (`E(X) <= |E X|` for `X <= 0`).
pub fn sample_error_flags(err: &ErrorFn) -> Flags {
    let batch = sampling::random_batch(13, 30, 5, -3.0, 3.0);
    let ph = batch.iter().all(|x| {
        let e = err.value(x);
        [0.5, 2.0, 3.7].iter().all(|&l| (err.value(&x.scale(l)) - l * e).abs() <= 1e-9 * (1.0 + (l * e).abs()))
    });
    let neg = sampling::random_batch(14, 30, 5, -3.0, 0.0);
    let monotone = neg.iter().all(|x| err.value(x) <= -x.expectation() + 1e-10);
    let regular = sampling::random_batch(15, 30, 4, -2.0, 2.0)
        .iter()
        .chain([DiscreteRv::constant(0.7), DiscreteRv::constant(-0.7)].iter())
        .all(|x| err.value(x) > 0.0);
    Flags::new(ph, monotone, err.loss.is_some(), regular)
}

/// Complete a quadrangle from a subregular error.
pub fn quadrangle_from_error(err: &ErrorFn) -> Result<Quartet> {
    validate_error(err)?;
    let flags = err.declared.unwrap_or_else(|| sample_error_flags(err));
    let e1 = err.clone();
    let e2 = err.clone();
    let e3 = err.clone();
    let ev = err.functional();
    let ee = err.functional();
    let deviation = functional(move |x| project_error(&e1, x).map(|p| p.value).unwrap_or(f64::NAN));
    let risk = functional(move |x| project_error(&e2, x).map(|p| p.value + x.expectation()).unwrap_or(f64::NAN));
    let statistic = statistic_fn(move |x| {
        project_error(&e3, x).map(|p| p.statistic).unwrap_or(StatInterval::point(f64::NAN))
    });
    let regret = functional(move |x| ev(x) + x.expectation());
    Ok(Quartet::new(format!("quadrangle[{}]", err.label), risk, deviation, regret, ee, statistic, flags))
}

/// Complete a quadrangle from a subregular regret, using the regret route.
pub fn quadrangle_from_regret(reg: &RegretFn) -> Result<Quartet> {
    let err = regret_to_error(reg);
    validate_error(&err)?;
    let flags = reg.declared.unwrap_or_else(|| sample_error_flags(&err));
    let r1 = reg.clone();
    let r2 = reg.clone();
    let r3 = reg.clone();
    let rv = reg.functional();
    let ev = err.functional();
    let risk = functional(move |x| regret_to_risk(&r1, x).map(|p| p.value).unwrap_or(f64::NAN));
    let deviation = functional(move |x| regret_to_risk(&r2, x).map(|p| p.value - x.expectation()).unwrap_or(f64::NAN));
    let statistic = statistic_fn(move |x| {
        regret_to_risk(&r3, x).map(|p| p.statistic).unwrap_or(StatInterval::point(f64::NAN))
    });
    Ok(Quartet::new(format!("quadrangle[{}]", reg.label), risk, deviation, rv, ev, statistic, flags))
}

/// The expectation quadrangle of a scalar loss, with the statistic taken from
/// the one-sided derivative criterion.
pub fn expectation_quadrangle(loss: &ScalarLoss) -> Result<Quartet> {
    loss.validate()?;
    let flags = Flags::new(
        loss.is_positively_homogeneous(),
        loss.is_monotone_generating(),
        true,
        loss.is_strictly_positive(),
    );
    let err = ErrorFn::from_loss(loss.clone()).with_flags(flags);
    quadrangle_from_error(&err).map(|q| q.relabel(format!("expectation[{}]", loss.name)))
}

/// The seminorm error `E(X) = R(|X|)` of a coherent risk.
pub fn error_from_coherent_risk(label: impl Into<String>, risk: Functional, flags: Flags) -> Result<ErrorFn> {
    if !flags.monotone {
        return Err(QuadError::Axiom {
            kind: "seminorm error",
            reason: "the risk must be monotone for R(|X|) to be an error".into(),
        });
    }
    let r = risk.clone();
    let eflags = Flags::new(flags.positively_homogeneous, false, false, true);
    Ok(ErrorFn::new(label, functional(move |x| r(&x.abs()))).with_flags(eflags))
}

/// `min sum_k w_k V_k(X - C_k)` subject to `sum_k w_k C_k = 0`.
fn mixed_regret(regrets: &[Functional], w: &[f64], x: &DiscreteRv) -> f64 {
    let r = regrets.len();
    if r == 1 {
        return regrets[0](x);
    }
    let step = search_step(x);
    let total = |c: &[f64]| -> f64 {
        let last: f64 = -c.iter().zip(w).map(|(ck, wk)| ck * wk).sum::<f64>() / w[r - 1];
        let mut s = 0.0;
        for k in 0..r {
            let ck = if k + 1 == r { last } else { c[k] };
            s += w[k] * regrets[k](&x.shift(-ck));
        }
        s
    };
    if r == 2 {
        return minimize_scalar(|c| total(&[c]), 0.0, step).map(|p| p.1).unwrap_or(f64::NAN);
    }
    let opts = ConvexOptions { scale: step, ..Default::default() };
    minimize_convex(total, |_: &mut [f64]| {}, &vec![0.0; r - 1], &opts).value
}

/// Weighted mixture of quadrangles; weights must be positive and sum to one.
pub fn mix_quadrangles(qs: &[Quartet], weights: &[f64]) -> Result<Quartet> {
    if qs.is_empty() || qs.len() != weights.len() {
        return Err(QuadError::Invalid("need one positive weight per quadrangle".into()));
    }
    if weights.iter().any(|&w| !(w > 0.0)) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(QuadError::param("weights", "must be positive and sum to 1"));
    }
    let w: Arc<Vec<f64>> = Arc::new(weights.to_vec());
    let qs: Arc<Vec<Quartet>> = Arc::new(qs.to_vec());
    let sum_of = |pick: fn(&Quartet, &DiscreteRv) -> f64| {
        let w = w.clone();
        let qs = qs.clone();
        functional(move |x| qs.iter().zip(w.iter()).map(|(q, wk)| wk * pick(q, x)).sum())
    };
    let risk = sum_of(|q, x| q.risk(x));
    let deviation = sum_of(|q, x| q.deviation(x));
    let regrets: Arc<Vec<Functional>> = Arc::new(qs.iter().map(|q| q.regret_fn()).collect());
    let (w1, r1) = (w.clone(), regrets.clone());
    let regret = functional(move |x| mixed_regret(&r1, &w1, x));
    let (w2, r2) = (w.clone(), regrets);
    let error = functional(move |x| mixed_regret(&r2, &w2, x) - x.expectation());
    let (w3, q3) = (w.clone(), qs.clone());
    let statistic = statistic_fn(move |x| {
        let mut acc = StatInterval::point(0.0);
        for (q, wk) in q3.iter().zip(w3.iter()) {
            acc = acc.add(&q.statistic(x).scale(*wk));
        }
        acc
    });
    let flags = Flags::new(
        qs.iter().all(|q| q.flags.positively_homogeneous),
        qs.iter().all(|q| q.flags.monotone),
        false,
        qs.iter().all(|q| q.flags.regular),
    );
    let label = format!(
        "mix[{}]",
        qs.iter().zip(w.iter()).map(|(q, wk)| format!("{wk}*{}", q.label)).collect::<Vec<_>>().join(" + ")
    );
    Ok(Quartet::new(label, risk, deviation, regret, error, statistic, flags))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScaleMode {
    /// `R = (1 - l) E + l R0`, `D = l D0`, `V = (1 - l) E + l V0`, `E = l E0`.
    Affine,
    /// `F(X) = l F0(X / l)` for every member, statistic `l S0(X / l)`.
    Perspective,
}

pub fn scale_quadrangle(q: &Quartet, lambda: f64, mode: ScaleMode) -> Result<Quartet> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(QuadError::param("lambda", format!("must be positive, got {lambda}")));
    }
    let q = Arc::new(q.clone());
    let l = lambda;
    let out = match mode {
        ScaleMode::Affine => {
            let (a, b, c, d, s) = (q.clone(), q.clone(), q.clone(), q.clone(), q.clone());
            let mut flags = q.flags;
            if l > 1.0 {
                flags.monotone = false;
                flags.coherent = false;
            }
            Quartet::new(
                format!("affine[{l}]({})", q.label),
                functional(move |x| (1.0 - l) * x.expectation() + l * a.risk(x)),
                functional(move |x| l * b.deviation(x)),
                functional(move |x| (1.0 - l) * x.expectation() + l * c.regret(x)),
                functional(move |x| l * d.error(x)),
                statistic_fn(move |x| s.statistic(x)),
                flags,
            )
        }
        ScaleMode::Perspective => {
            let (a, b, c, d, s) = (q.clone(), q.clone(), q.clone(), q.clone(), q.clone());
            Quartet::new(
                format!("perspective[{l}]({})", q.label),
                functional(move |x| l * a.risk(&x.scale(1.0 / l))),
                functional(move |x| l * b.deviation(&x.scale(1.0 / l))),
                functional(move |x| l * c.regret(&x.scale(1.0 / l))),
                functional(move |x| l * d.error(&x.scale(1.0 / l))),
                statistic_fn(move |x| s.statistic(&x.scale(1.0 / l)).scale(l)),
                q.flags,
            )
        }
    };
    Ok(out)
}

/// The reverted quadrangle of `q1` and `q2`: `q1` acting on `X`, `q2` on `-X`.
pub fn revert_quadrangles(q1: &Quartet, q2: &Quartet) -> Quartet {
    let q1 = Arc::new(q1.clone());
    let q2 = Arc::new(q2.clone());
    let half_dev = {
        let (a, b) = (q1.clone(), q2.clone());
        move |x: &DiscreteRv| 0.5 * (a.deviation(x) + b.deviation(&x.neg()))
    };
    let half_err = {
        let (a, b) = (q1.clone(), q2.clone());
        move |x: &DiscreteRv| {
            let f = |c: f64| 0.5 * (a.error(&x.shift(c)) + b.error(&x.neg().shift(c)));
            minimize_scalar(f, 0.0, search_step(x)).map(|p| p.1).unwrap_or(f64::NAN)
        }
    };
    let hd = half_dev.clone();
    let he = half_err.clone();
    let (s1, s2) = (q1.clone(), q2.clone());
    let flags = Flags::new(
        q1.flags.positively_homogeneous && q2.flags.positively_homogeneous,
        false,
        false,
        q1.flags.regular && q2.flags.regular,
    );
    Quartet::new(
        format!("revert[{}, {}]", q1.label, q2.label),
        functional(move |x| x.expectation() + hd(x)),
        functional(half_dev),
        functional(move |x| x.expectation() + he(x)),
        functional(half_err),
        statistic_fn(move |x| s1.statistic(x).add(&s2.statistic(&x.neg()).neg()).scale(0.5)),
        flags,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u15() -> DiscreteRv {
        DiscreteRv::uniform(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap()
    }

    #[test]
    fn koenker_bassett_projection_is_quantile() {
        let err = ErrorFn::from_loss(ScalarLoss::koenker_bassett(0.6).unwrap());
        let x = u15();
        let p = project_error(&err, &x).unwrap();
        assert!(p.statistic.gap(&StatInterval::new(3.0, 4.0)) < 1e-12, "{:?}", p.statistic);
        // CVaR deviation: 4.5 - 3
        assert!((p.value - 1.5).abs() < 1e-12);
        let r = regret_to_risk(&error_to_regret(&err), &x).unwrap();
        assert!((r.value - 4.5).abs() < 1e-12);
        assert!(r.statistic.gap(&p.statistic) < 1e-12);
    }

    #[test]
    fn generic_route_matches_structured_route() {
        let err = ErrorFn::from_loss(ScalarLoss::koenker_bassett(0.6).unwrap());
        let bare = ErrorFn::new("bare", err.functional());
        let x = u15();
        let a = project_error(&err, &x).unwrap();
        let b = project_error(&bare, &x).unwrap();
        assert!((a.value - b.value).abs() < 1e-10);
        assert!(a.statistic.gap(&b.statistic) < 1e-7, "{:?} vs {:?}", a.statistic, b.statistic);
    }

    #[test]
    fn squared_error_gives_mean_and_variance() {
        let q = expectation_quadrangle(&ScalarLoss::squared()).unwrap();
        let x = u15();
        let s = q.statistic(&x);
        assert!((s.lo - 3.0).abs() < 1e-12 && (s.hi - 3.0).abs() < 1e-12);
        assert!((q.deviation(&x) - 2.0).abs() < 1e-12);
        assert!((q.risk(&x) - 5.0).abs() < 1e-12);
        assert!(!q.flags.monotone && !q.flags.positively_homogeneous && q.flags.expectation_type);
    }

    #[test]
    fn rejects_degenerate_errors() {
        let zero = ErrorFn::new("zero", functional(|_| 0.0));
        assert!(quadrangle_from_error(&zero).is_err());
        let plus = ErrorFn::new("plus", functional(|x| x.expect(|v| v.max(0.0))));
        assert!(matches!(quadrangle_from_error(&plus), Err(QuadError::Axiom { .. })));
    }

    #[test]
    fn seminorm_error_from_cvar() {
        let risk = functional(|x| x.cvar(0.5));
        let err = error_from_coherent_risk("cvar-norm", risk.clone(), Flags::new(true, true, false, true)).unwrap();
        let x = DiscreteRv::uniform(&[-2.0, 2.0]).unwrap();
        assert!((err.value(&x) - 2.0).abs() < 1e-15);
        assert!(error_from_coherent_risk("bad", risk, Flags::new(true, false, false, true)).is_err());
    }

    #[test]
    fn regret_quadrangle_round_trip() {
        let reg = RegretFn::new("cvar-regret", functional(|x| x.expect(|v| v.max(0.0)) / 0.4));
        let q = quadrangle_from_regret(&reg).unwrap();
        let x = u15();
        assert!((q.risk(&x) - 4.5).abs() < 1e-9);
        assert!(q.statistic(&x).gap(&StatInterval::new(3.0, 4.0)) < 1e-7, "{:?}", q.statistic(&x));
        assert!(q.flags.monotone && q.flags.positively_homogeneous);
    }
}
