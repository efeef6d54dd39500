//! Epi-regularization: infimal convolution of a risk or regret with a scaled
//! kernel regret, in primal and dual form.

use serde::Serialize;

use crate::dual::{DualKind, Envelope, Shape};
use crate::divergence::DivergenceFn;
use crate::error::{QuadError, Result};
use crate::rv::DiscreteRv;
use crate::solvers::scalar::GOLDEN_TOL;
use crate::solvers::{golden_section, minimize_convex, minimize_scalar, Budget, ConvexOptions};

/// Kernel regret `V~` used for smoothing.
#[derive(Clone, Debug)]
pub enum Kernel {
    /// `V~(X) = E[phi*(X)]`, with conjugate `E[phi(Q)]`.
    Phi(DivergenceFn),
    /// Positively homogeneous kernel given by its envelope.
    Envelope(Envelope),
}

impl Kernel {
    /// `V~(eps Y) / eps` on scenario values.
    fn scaled(&self, y: &[f64], probs: &[f64], eps: f64) -> f64 {
        match self {
            Kernel::Phi(phi) => y.iter().zip(probs).map(|(v, p)| p * phi.conj(eps * v)).sum::<f64>() / eps,
            Kernel::Envelope(env) => support_on(env, y, probs),
        }
    }
}

#[derive(Clone, Debug)]
pub struct EpiSpec {
    /// Risk (`DualKind::Risk`) or regret (`DualKind::Regret`) being smoothed.
    pub base: Envelope,
    pub kernel: Kernel,
    pub epsilon: f64,
    pub budget: Budget,
}

impl EpiSpec {
    pub fn new(base: Envelope, kernel: Kernel, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(QuadError::param("epsilon", format!("must be positive, got {epsilon}")));
        }
        if !matches!(base.kind, DualKind::Risk | DualKind::Regret) {
            return Err(QuadError::Invalid(format!("base {} must be a risk or regret envelope", base.label)));
        }
        if let Kernel::Envelope(k) = &kernel {
            if k.kind != DualKind::Regret && k.kind != DualKind::Risk {
                return Err(QuadError::Invalid(format!("kernel {} must be a regret envelope", k.label)));
            }
        }
        Ok(EpiSpec { base, kernel, epsilon, budget: Budget::default() })
    }
}

/// `sup_{Q in env} E[Q X]` on scenario values, with a greedy fast path for boxes.
fn support_on(env: &Envelope, xs: &[f64], probs: &[f64]) -> f64 {
    if let Shape::Box { lo, hi, mean } = env.shape {
        if let Some(v) = box_support(lo, hi, mean, xs, probs) {
            return v - env.offset * xs.iter().zip(probs).map(|(a, b)| a * b).sum::<f64>();
        }
    }
    env.support(&DiscreteRv::from_scenarios(xs, probs)).map(|s| s.value).unwrap_or(f64::INFINITY)
}

/// `sup {E[Q X] : lo <= Q <= hi, E[Q] = mean}`, filling the largest values first.
fn box_support(lo: f64, hi: f64, mean: Option<f64>, xs: &[f64], probs: &[f64]) -> Option<f64> {
    let Some(m) = mean else {
        return Some(xs.iter().zip(probs).map(|(x, p)| p * x * if *x > 0.0 { hi } else { lo }).sum());
    };
    if !(lo.is_finite() && hi.is_finite()) || m < lo || m > hi {
        return None;
    }
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[b].total_cmp(&xs[a]));
    // E[Q X] = m c + E[Q (X - c)] keeps constants exact
    let c = xs[idx[0]];
    let mut budget = m - lo;
    let mut value = 0.0;
    for i in idx {
        let take = if probs[i] > 0.0 { (budget / probs[i]).min(hi - lo).max(0.0) } else { 0.0 };
        budget -= take * probs[i];
        value += probs[i] * (xs[i] - c) * (lo + take);
    }
    Some(m * c + value)
}

#[derive(Clone, Debug, Serialize)]
pub struct EpiValue {
    pub value: f64,
    /// Minimizing `Y` per scenario (primal) or maximizing density (dual).
    pub point: Vec<f64>,
}

/// `inf_Y {F(X - Y) + V~(eps Y) / eps}` over the atom-dimensional `Y`,
/// starting at `Y = 0`, where `F` is the base functional.
pub fn epi_primal(spec: &EpiSpec, x: &DiscreteRv) -> EpiValue {
    let xs = x.values();
    let probs = x.probs();
    let eps = spec.epsilon;
    let f = |y: &[f64]| {
        let z: Vec<f64> = xs.iter().zip(y).map(|(a, b)| a - b).collect();
        support_on(&spec.base, &z, probs) + spec.kernel.scaled(y, probs, eps)
    };
    let y0 = vec![0.0; xs.len()];
    let f0 = f(&y0);
    let span = (x.ess_sup() - x.ess_inf()).max(1e-3);
    let (value, point) = match separable_primal(spec, x, span) {
        Some(y) => (f(&y), y),
        None => {
            let res = minimize_convex(f, |_: &mut [f64]| {}, &y0, &ConvexOptions::from_budget(span, &spec.budget));
            (res.value, res.x)
        }
    };
    // improvements at rounding level do not move the point off Y = 0
    if value < f0 - 4.0 * f64::EPSILON * f0.abs().max(1.0) {
        EpiValue { value, point }
    } else {
        EpiValue { value: f0, point: y0 }
    }
}

/// Minimizer for a box base and a divergence kernel. The box support is
/// `min_C {m C + E[hi (Z - C)_+ - lo (Z - C)_-]}`, so for fixed `C` the problem
/// splits into one convex scalar problem per atom.
fn separable_primal(spec: &EpiSpec, x: &DiscreteRv, span: f64) -> Option<Vec<f64>> {
    let (Shape::Box { lo, hi, mean }, Kernel::Phi(phi)) = (&spec.base.shape, &spec.kernel) else {
        return None;
    };
    if spec.base.offset != 0.0 || !lo.is_finite() || !hi.is_finite() {
        return None;
    }
    let (lo, hi, eps) = (*lo, *hi, spec.epsilon);
    let atom = |z: f64| -> Option<(f64, f64)> {
        let h = |y: f64| {
            let d = z - y;
            hi * d.max(0.0) + lo * d.min(0.0) + phi.conj(eps * y) / eps
        };
        let (y, v) = minimize_scalar(h, z, span).ok()?;
        let at_kink = h(z);
        Some(if at_kink <= v { (z, at_kink) } else { (y, v) })
    };
    let total = |c: f64| -> Option<(f64, Vec<f64>)> {
        let mut v = mean.map_or(0.0, |m| m * c);
        let mut ys = Vec::with_capacity(x.len());
        for (xi, p) in x.atoms() {
            let (y, h) = atom(xi - c)?;
            v += p * h;
            ys.push(y);
        }
        Some((v, ys))
    };
    let c = match mean {
        Some(_) => minimize_scalar(|c| total(c).map_or(f64::INFINITY, |t| t.0), x.expectation(), span).ok()?.0,
        None => 0.0,
    };
    total(c).map(|t| t.1)
}

fn require_kind(spec: &EpiSpec, kind: DualKind) -> Result<()> {
    if spec.base.kind != kind {
        return Err(QuadError::Invalid(format!("base {} is not a {kind:?} envelope", spec.base.label)));
    }
    Ok(())
}

/// Epi-regularized risk `inf_Y {R(X - Y) + V~(eps Y) / eps}`.
pub fn epi_risk_primal(spec: &EpiSpec, x: &DiscreteRv) -> Result<f64> {
    require_kind(spec, DualKind::Risk)?;
    Ok(epi_primal(spec, x).value)
}

/// Epi-regularized regret `inf_Y {V(X - Y) + V~(eps Y) / eps}`.
pub fn epi_regret(spec: &EpiSpec, x: &DiscreteRv) -> Result<f64> {
    require_kind(spec, DualKind::Regret)?;
    Ok(epi_primal(spec, x).value)
}

/// Risk of the epi-regularized regret by the regret formula
/// `min_C {C + V_eps(X - C)}`.
pub fn epi_regret_to_risk(spec: &EpiSpec, x: &DiscreteRv) -> Result<f64> {
    require_kind(spec, DualKind::Regret)?;
    let g = |c: f64| c + epi_primal(spec, &x.shift(-c)).value;
    let span = (x.ess_sup() - x.ess_inf()).max(1e-3);
    Ok(minimize_scalar(g, x.expectation(), 0.25 * span)?.1)
}

/// `max_{q in [lo, hi]} h(q)` for concave `h`, expanding infinite ends.
fn max_concave<H: Fn(f64) -> f64>(h: H, lo: f64, hi: f64) -> (f64, f64) {
    let neg = |q: f64| -h(q);
    let anchor = if lo.is_finite() && hi.is_finite() {
        0.5 * (lo + hi)
    } else if lo.is_finite() {
        lo.max(1.0)
    } else if hi.is_finite() {
        hi.min(1.0)
    } else {
        1.0
    };
    let mut a = lo;
    let mut b = hi;
    let mut step = 1.0;
    if !b.is_finite() {
        b = anchor + step;
        while neg(b) < neg(0.5 * (anchor + b)) && b < 1e12 {
            step *= 2.0;
            b = anchor + step;
        }
    }
    step = 1.0;
    if !a.is_finite() {
        a = anchor - step;
        while neg(a) < neg(0.5 * (anchor + a)) && a > -1e12 {
            step *= 2.0;
            a = anchor - step;
        }
    }
    let (q, v) = golden_section(neg, a, b, GOLDEN_TOL * 1e-2);
    let (q, v) = [(a, neg(a)), (b, neg(b))].into_iter().fold((q, v), |best, it| if it.1 < best.1 { it } else { best });
    (q, -v)
}

/// Per-atom dual data: the box for `Q`, the required mean and the penalty.
struct DualSetup {
    lo: f64,
    hi: f64,
    mean: Option<f64>,
    /// `(center, radius)` of an `E[(Q - c)^2] <= r^2` constraint.
    ball: Option<(f64, f64)>,
    phi: Option<DivergenceFn>,
}

fn dual_setup(spec: &EpiSpec) -> Result<DualSetup> {
    let unsupported = |what: &str| QuadError::Invalid(format!("dual form needs a box base envelope; {what}"));
    if spec.base.offset != 0.0 {
        return Err(unsupported("base has an offset"));
    }
    let Shape::Box { lo, hi, mean } = spec.base.shape else {
        return Err(unsupported(&format!("{} is not a box", spec.base.label)));
    };
    let mut s = DualSetup { lo, hi, mean, ball: None, phi: None };
    let merge_mean = |a: Option<f64>, b: Option<f64>| -> Result<Option<f64>> {
        match (a, b) {
            (Some(u), Some(v)) if (u - v).abs() > 1e-12 => {
                Err(QuadError::Infeasible(format!("envelope means {u} and {v} are incompatible")))
            }
            (Some(u), _) | (None, Some(u)) => Ok(Some(u)),
            (None, None) => Ok(None),
        }
    };
    match &spec.kernel {
        Kernel::Phi(phi) => {
            let (a, b) = phi.dom;
            s.lo = s.lo.max(a);
            s.hi = s.hi.min(b);
            s.phi = Some(phi.clone());
        }
        Kernel::Envelope(k) if k.offset == 0.0 => match k.shape {
            Shape::Box { lo, hi, mean } => {
                s.lo = s.lo.max(lo);
                s.hi = s.hi.min(hi);
                s.mean = merge_mean(s.mean, mean)?;
            }
            Shape::Ball { center, radius, mean } if mean.is_none() => s.ball = Some((center, radius)),
            _ => return Err(QuadError::Invalid(format!("kernel {} has no separable dual", k.label))),
        },
        Kernel::Envelope(k) => return Err(QuadError::Invalid(format!("kernel {} has an offset", k.label))),
    }
    if s.lo > s.hi {
        return Err(QuadError::Infeasible("dual box is empty".into()));
    }
    Ok(s)
}

/// `sup_Q {E[Q X] - R*(Q) - V~*(Q) / eps}` over the base envelope, by
/// Lagrangian relaxation of the mean and ball constraints with per-atom
/// one-dimensional maximization.
pub fn epi_dual(spec: &EpiSpec, x: &DiscreteRv) -> Result<EpiValue> {
    let s = dual_setup(spec)?;
    let xs = x.values();
    let probs = x.probs();
    let eps = spec.epsilon;
    let span = (x.ess_sup() - x.ess_inf()).max(1e-3);
    // best q for one atom at multipliers (nu, mu)
    let atom = |xi: f64, nu: f64, mu: f64| -> (f64, f64) {
        let h = |q: f64| {
            let mut v = q * (xi - nu);
            if let Some(phi) = &s.phi {
                v -= phi.phi(q) / eps;
            }
            if let Some((c, _)) = s.ball {
                v -= mu * (q - c) * (q - c);
            }
            v
        };
        match (&s.phi, s.ball) {
            (None, Some((c, _))) if mu > 0.0 => {
                let q = (c + (xi - nu) / (2.0 * mu)).clamp(s.lo, s.hi);
                (q, h(q))
            }
            (None, _) => {
                let q = if xi - nu > 0.0 { s.hi } else { s.lo };
                (q, if q.is_finite() { h(q) } else { f64::INFINITY })
            }
            _ => max_concave(h, s.lo, s.hi),
        }
    };
    let lagrangian = |nu: f64, mu: f64| -> f64 {
        let mut v: f64 = xs.iter().zip(probs).map(|(xi, p)| p * atom(*xi, nu, mu).1).sum();
        if let Some(m) = s.mean {
            v += nu * m;
        }
        if let Some((_, r)) = s.ball {
            v += mu * r * r;
        }
        v
    };
    let inner = |mu: f64| -> Result<(f64, f64)> {
        match s.mean {
            Some(_) => minimize_scalar(|nu| lagrangian(nu, mu), x.expectation(), span),
            None => Ok((0.0, lagrangian(0.0, mu))),
        }
    };
    let (nu, mu, value) = match s.ball {
        None => {
            let (nu, v) = inner(0.0)?;
            (nu, 0.0, v)
        }
        Some(_) => {
            // the dual is convex in mu, hence unimodal in t = ln mu; mu = 0
            // is compared separately since the minimum may sit there
            let g = |t: f64| inner(t.exp()).map(|r| r.1).unwrap_or(f64::INFINITY);
            let scale = span.ln();
            let (t, v) = golden_section(g, scale - 30.0, scale + 30.0, 1e-12);
            let v0 = inner(0.0).map(|r| r.1).unwrap_or(f64::INFINITY);
            let mu = if v0 <= v { 0.0 } else { t.exp() };
            let (nu, v) = inner(mu)?;
            (nu, mu, v)
        }
    };
    if !value.is_finite() {
        return Err(QuadError::Unbounded("dual objective is unbounded".into()));
    }
    let point = xs.iter().map(|xi| atom(*xi, nu, mu).0).collect();
    Ok(EpiValue { value, point })
}

/// Dual value of the epi-regularized risk.
pub fn epi_risk_dual(spec: &EpiSpec, x: &DiscreteRv) -> Result<f64> {
    require_kind(spec, DualKind::Risk)?;
    Ok(epi_dual(spec, x)?.value)
}

/// `sup_{Q in dom V*} {E[Q X] - K(Q) / eps}` for a box regret envelope and
/// divergence root `K(Q) = E[phi(Q)]`.
pub fn epi_regret_divroot(base: &Envelope, phi: &DivergenceFn, epsilon: f64, x: &DiscreteRv) -> Result<f64> {
    if base.kind != DualKind::Regret {
        return Err(QuadError::Invalid(format!("base {} is not a regret envelope", base.label)));
    }
    if let Shape::Box { lo, hi, .. } = base.shape {
        let (a, b) = phi.dom;
        if lo < a || hi > b {
            return Err(QuadError::Invalid(format!(
                "envelope box [{lo}, {hi}] is not inside the domain [{a}, {b}] of {}",
                phi.name
            )));
        }
    }
    let spec = EpiSpec::new(base.clone(), Kernel::Phi(phi.clone()), epsilon)?;
    Ok(epi_dual(&spec, x)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual::cvar_envelope;

    fn cvar_regret(alpha: f64) -> Envelope {
        Envelope::new("cvar_regret", DualKind::Regret, Shape::Box { lo: 0.0, hi: 1.0 / (1.0 - alpha), mean: None })
    }

    fn l2_kernel() -> Kernel {
        Kernel::Envelope(Envelope::new("mean_l2", DualKind::Regret, Shape::Ball { center: 1.0, radius: 1.0, mean: None }))
    }

    #[test]
    fn greedy_box_matches_cvar() {
        let x = DiscreteRv::new(&[1.0, 2.0, 3.0, 4.0, 5.0], &[0.2; 5]).unwrap();
        let v = box_support(0.0, 2.5, Some(1.0), x.values(), x.probs()).unwrap();
        assert!((v - 4.5).abs() < 1e-12);
    }

    #[test]
    fn primal_dual_agree() {
        let x = DiscreteRv::new(&[-1.0, 1.0], &[0.5, 0.5]).unwrap();
        for kernel in [l2_kernel(), Kernel::Phi(DivergenceFn::kl()), Kernel::Phi(DivergenceFn::pearson())] {
            let spec = EpiSpec::new(cvar_envelope(0.5).unwrap(), kernel, 1.0).unwrap();
            let p = epi_risk_primal(&spec, &x).unwrap();
            let d = epi_risk_dual(&spec, &x).unwrap();
            assert!((p - d).abs() < 1e-6, "{:?}: {p} {d}", spec.kernel);
            assert!(p >= x.expectation() - 1e-9 && p <= x.cvar(0.5) + 1e-12);
        }
    }

    #[test]
    fn constant_fidelity_and_regret_projection() {
        let spec = EpiSpec::new(cvar_envelope(0.3).unwrap(), Kernel::Phi(DivergenceFn::kl()), 0.7).unwrap();
        assert_eq!(epi_risk_primal(&spec, &DiscreteRv::constant(2.5)).unwrap(), 2.5);
        let x = DiscreteRv::new(&[-0.4, 0.3, 1.1], &[0.3, 0.5, 0.2]).unwrap();
        let reg = EpiSpec::new(cvar_regret(0.3), Kernel::Phi(DivergenceFn::kl()), 0.7).unwrap();
        let r1 = epi_risk_primal(&spec, &x).unwrap();
        let r2 = epi_regret_to_risk(&reg, &x).unwrap();
        assert!((r1 - r2).abs() < 1e-6, "{r1} {r2}");
    }

    #[test]
    fn divroot_matches_primal_regret() {
        let x = DiscreteRv::new(&[-1.0, 1.0], &[0.5, 0.5]).unwrap();
        let reg = EpiSpec::new(cvar_regret(0.5), Kernel::Phi(DivergenceFn::kl()), 1.0).unwrap();
        let d = epi_regret_divroot(&cvar_regret(0.5), &DivergenceFn::kl(), 1.0, &x).unwrap();
        let p = epi_regret(&reg, &x).unwrap();
        assert!((p - d).abs() < 1e-6, "{p} {d}");
        assert!(epi_regret_divroot(&cvar_regret(0.5), &DivergenceFn::kl(), 1.0, &DiscreteRv::constant(0.0))
            .unwrap()
            .abs()
            < 1e-12);
    }
}
