//! One-parameter families `F_tau`: perspective of a parent functional and
//! support function of a divergence ball.

use serde::Serialize;

use super::phi::DivergenceFn;
use super::stochastic::{JForm, StochasticDivergenceJ};
use crate::error::{QuadError, Result};
use crate::rv::DiscreteRv;
use crate::solvers::{
    golden_section, minimize_convex, minimize_unimodal, project_simplex_with_mean, ConvexOptions, LinearProgram,
    LpStatus, Relation,
};

pub const LAMBDA_MIN: f64 = 1e-8;
pub const LAMBDA_MAX: f64 = 1e8;
const LAMBDA_GRID: usize = 161;

/// Which end of the multiplier range produced the value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Interior,
    /// The infimum is the limit `lambda -> 0`.
    Zero,
    /// The infimum is approached as `lambda` grows.
    Infinity,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FamilyValue {
    pub value: f64,
    pub lambda: f64,
    pub boundary: Boundary,
}

/// `inf_{lambda > 0} g(lambda)` for `g` quasi-convex in `ln lambda`, searched
/// over `[LAMBDA_MIN, LAMBDA_MAX]`. `limit0` is the value of `lim g` at zero
/// when known.
pub fn minimize_over_lambda<G: Fn(f64) -> f64>(g: G, limit0: Option<f64>) -> FamilyValue {
    let h = |t: f64| g(t.exp());
    let (t, v) = minimize_unimodal(h, LAMBDA_MIN.ln(), LAMBDA_MAX.ln(), LAMBDA_GRID);
    let lambda = t.exp();
    let at_edge = |edge: f64| (t - edge.ln()).abs() < 1e-6;
    if let Some(l0) = limit0 {
        if l0 <= v {
            return FamilyValue { value: l0, lambda: 0.0, boundary: Boundary::Zero };
        }
    }
    let boundary = if at_edge(LAMBDA_MIN) {
        Boundary::Zero
    } else if at_edge(LAMBDA_MAX) {
        Boundary::Infinity
    } else {
        Boundary::Interior
    };
    FamilyValue { value: v, lambda, boundary }
}

/// Perspective family member `inf_{lambda>0} lambda [F(X/lambda) + tau]`.
/// A minimizer at the lower edge reports `lambda F(X/lambda)` there, which is
/// the recession value of the parent.
pub fn family_eval_perspective<F>(parent: F, tau: f64, x: &DiscreteRv) -> Result<FamilyValue>
where
    F: Fn(&DiscreteRv) -> f64,
{
    if !(tau > 0.0) {
        return Err(QuadError::param("tau", format!("must be positive, got {tau}")));
    }
    let g = |l: f64| l * (parent(&x.scale(1.0 / l)) + tau);
    let mut fv = minimize_over_lambda(g, None);
    if fv.boundary == Boundary::Zero {
        fv.value = LAMBDA_MIN * parent(&x.scale(1.0 / LAMBDA_MIN));
    }
    Ok(fv)
}

/// Support function of a divergence ball and a maximizing density.
#[derive(Clone, Debug, Serialize)]
pub struct EnvelopeValue {
    pub value: f64,
    pub density: Vec<f64>,
    pub budget_used: f64,
}

/// `sup {E[Q X] : J(Q) <= tau}`.
pub fn family_eval_envelope(j: &StochasticDivergenceJ, tau: f64, x: &DiscreteRv) -> Result<EnvelopeValue> {
    if !(tau > 0.0) {
        return Err(QuadError::param("tau", format!("must be positive, got {tau}")));
    }
    match &j.form {
        JForm::Phi(phi) if phi.name == "tv" && j.normalized => tv_envelope(tau, x),
        JForm::Phi(phi) => phi_envelope(phi, j.normalized, tau, x),
        JForm::General(_) => general_envelope(j, tau, x),
    }
}

/// Total variation ball by LP in `Q = 1 + u - v`.
fn tv_envelope(tau: f64, x: &DiscreteRv) -> Result<EnvelopeValue> {
    let n = x.len();
    let p = x.probs();
    let xs = x.values();
    let mut lp = LinearProgram::new(2 * n);
    let mut c = vec![0.0; 2 * n];
    for i in 0..n {
        c[i] = p[i] * xs[i];
        c[n + i] = -p[i] * xs[i];
    }
    lp.maximize(c);
    let mean: Vec<(usize, f64)> = (0..n).flat_map(|i| [(i, p[i]), (n + i, -p[i])]).collect();
    lp.constraint_sparse(&mean, Relation::Eq, 0.0);
    let budget: Vec<(usize, f64)> = (0..n).flat_map(|i| [(i, p[i]), (n + i, p[i])]).collect();
    lp.constraint_sparse(&budget, Relation::Le, tau);
    for i in 0..n {
        lp.bounds(n + i, 0.0, 1.0);
    }
    let sol = lp.solve();
    if sol.status != LpStatus::Optimal {
        return Err(QuadError::Infeasible(format!("total variation envelope LP: {:?}", sol.status)));
    }
    let density: Vec<f64> = (0..n).map(|i| 1.0 + sol.x[i] - sol.x[n + i]).collect();
    let budget_used = (0..n).map(|i| p[i] * (density[i] - 1.0).abs()).sum();
    Ok(EnvelopeValue { value: x.expectation() + sol.objective, density, budget_used })
}

/// Lagrangian route for `E[phi(Q)] <= tau` using `phi` only: for multipliers
/// `(mu, nu)` each atom solves `max_q q (x_i - nu) - mu phi(q)` on its
/// sublevel box, `nu` is fixed by `E[Q] = 1` and `mu` by the budget.
fn phi_envelope(phi: &DivergenceFn, normalized: bool, tau: f64, x: &DiscreteRv) -> Result<EnvelopeValue> {
    let xs = x.values();
    let p = x.probs();
    let n = xs.len();
    let boxes: Vec<(f64, f64)> = p
        .iter()
        .map(|&pi| {
            let (a, b) = phi.sublevel(tau / pi);
            if normalized && a >= 0.0 {
                (a, b.min(1.0 / pi))
            } else {
                (a, b)
            }
        })
        .collect();
    let atom = |i: usize, mu: f64, nu: f64| -> f64 {
        let (a, b) = boxes[i];
        let s = xs[i] - nu;
        let (q, _) = golden_section(|q| mu * phi.phi(q) - q * s, a, b, 1e-14 * (1.0 + b.abs()));
        let mut best = (q, mu * phi.phi(q) - q * s);
        for e in [a, b] {
            let v = mu * phi.phi(e) - e * s;
            if v < best.1 {
                best = (e, v);
            }
        }
        best.0
    };
    let density_for = |mu: f64| -> Vec<f64> {
        if !normalized {
            return (0..n).map(|i| atom(i, mu, 0.0)).collect();
        }
        let mean = |nu: f64| (0..n).map(|i| p[i] * atom(i, mu, nu)).sum::<f64>();
        let span = x.ess_sup() - x.ess_inf() + 1.0;
        let mut lo = x.ess_inf() - span;
        let mut hi = x.ess_sup() + span;
        let mut k = 0;
        while mean(lo) < 1.0 && k < 80 {
            lo -= span * 2f64.powi(k);
            k += 1;
        }
        k = 0;
        while mean(hi) > 1.0 && k < 80 {
            hi += span * 2f64.powi(k);
            k += 1;
        }
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if m == lo || m == hi {
                break;
            }
            if mean(m) > 1.0 {
                lo = m;
            } else {
                hi = m;
            }
        }
        let nu = 0.5 * (lo + hi);
        let mut q: Vec<f64> = (0..n).map(|i| atom(i, mu, nu)).collect();
        // restore E[Q] = 1 exactly through the atom with the most room
        let m: f64 = q.iter().zip(p).map(|(a, b)| a * b).sum();
        let k = (0..n).max_by(|&a, &b| p[a].partial_cmp(&p[b]).unwrap()).unwrap();
        q[k] += (1.0 - m) / p[k];
        q
    };
    let budget = |q: &[f64]| q.iter().zip(p).map(|(a, b)| b * phi.phi(*a)).sum::<f64>();
    if normalized {
        // all mass on the top atom attains ess sup whenever it fits the budget
        let mut q = vec![0.0; n];
        q[n - 1] = 1.0 / p[n - 1];
        if budget(&q) <= tau {
            return Ok(EnvelopeValue { value: x.ess_sup(), budget_used: budget(&q), density: q });
        }
    }
    let scale = x.ess_sup() - x.ess_inf() + x.l2_norm() + 1e-300;
    let (mut lo, mut hi) = (1e-12 * scale, 1e12 * scale);
    let q_lo = density_for(lo);
    if budget(&q_lo) <= tau {
        let value = q_lo.iter().zip(xs).zip(p).map(|((q, v), w)| q * v * w).sum();
        return Ok(EnvelopeValue { value, budget_used: budget(&q_lo), density: q_lo });
    }
    for _ in 0..200 {
        let m = (lo * hi).sqrt();
        if m <= lo || m >= hi || hi / lo < 1.0 + 1e-15 {
            break;
        }
        if budget(&density_for(m)) > tau {
            lo = m;
        } else {
            hi = m;
        }
    }
    let q = density_for(hi);
    let value = q.iter().zip(xs).zip(p).map(|((q, v), w)| q * v * w).sum();
    Ok(EnvelopeValue { value, budget_used: budget(&q), density: q })
}

/// Penalty route for a general `J`: bisection on the multiplier with an inner
/// convex solve over the density set.
fn general_envelope(j: &StochasticDivergenceJ, tau: f64, x: &DiscreteRv) -> Result<EnvelopeValue> {
    let xs = x.values().to_vec();
    let p = x.probs().to_vec();
    let n = xs.len();
    let solve = |mu: f64| -> Vec<f64> {
        let f = |q: &[f64]| {
            let jv = j.value(q, &p);
            let lin: f64 = q.iter().zip(&xs).zip(&p).map(|((a, b), c)| a * b * c).sum();
            mu * jv - lin
        };
        let normalized = j.normalized;
        let pp = p.clone();
        let project = move |q: &mut [f64]| {
            if normalized {
                project_simplex_with_mean(q, &pp, 1.0);
            } else {
                q.iter_mut().for_each(|v| *v = v.max(0.0));
            }
        };
        let opts = ConvexOptions { scale: 1.0, subgradient_iters: 2_000, sampling_iters: 1_000, seed: 0 };
        minimize_convex(f, project, &vec![1.0; n], &opts).x
    };
    let (mut lo, mut hi): (f64, f64) = (1e-6, 1e6);
    for _ in 0..60 {
        let m = (lo * hi).sqrt();
        if j.value(&solve(m), &p) > tau {
            lo = m;
        } else {
            hi = m;
        }
    }
    let q = solve(hi);
    let value = q.iter().zip(&xs).zip(&p).map(|((a, b), c)| a * b * c).sum();
    Ok(EnvelopeValue { value, budget_used: j.value(&q, &p), density: q })
}

/// The regret `V(X) = 0` if `E[X + 1]_+ <= 1` and `+inf` otherwise.
pub fn indicator_regret(x: &DiscreteRv) -> f64 {
    if x.expect(|v| (v + 1.0).max(0.0)) <= 1.0 + 1e-15 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Its perspective family, `tau inf {lambda > 0 : E[X/lambda + 1]_+ <= 1}`.
pub fn indicator_family_regret(tau: f64, x: &DiscreteRv) -> f64 {
    // feasible s = 1/lambda form an interval [0, s_max]
    let g = |s: f64| x.expect(|v| (s * v + 1.0).max(0.0));
    let mut hi = 1.0;
    while g(hi) <= 1.0 {
        hi *= 2.0;
        if hi > 1e300 {
            return 0.0;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let m = 0.5 * (lo + hi);
        if m == lo || m == hi {
            break;
        }
        if g(m) <= 1.0 {
            lo = m;
        } else {
            hi = m;
        }
    }
    if lo == 0.0 {
        return f64::INFINITY;
    }
    tau / lo
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym() -> DiscreteRv {
        DiscreteRv::uniform(&[-1.0, 1.0]).unwrap()
    }

    #[test]
    fn perspective_of_second_moment() {
        let v = family_eval_perspective(|x: &DiscreteRv| x.expect(|v| v * v), 1.0, &sym()).unwrap();
        assert!((v.value - 2.0).abs() < 1e-9);
        let d = family_eval_perspective(|x: &DiscreteRv| x.variance(), 1.0, &sym()).unwrap();
        assert!((d.value - 2.0).abs() < 1e-9);
        let z = family_eval_perspective(|x: &DiscreteRv| x.expect(|v| v * v), 1.0, &DiscreteRv::constant(0.0)).unwrap();
        assert!(z.value.abs() < 1e-7);
    }

    #[test]
    fn tv_ball_matches_closed_form() {
        let x = DiscreteRv::uniform(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let j = StochasticDivergenceJ::from_phi(DivergenceFn::tv(), true);
        let v = family_eval_envelope(&j, 0.8, &x).unwrap();
        assert!((v.value - 4.4).abs() < 1e-12);
    }

    #[test]
    fn kl_ball_limits() {
        let x = DiscreteRv::new(&[0.0, 0.3, 1.0], &[0.5, 0.3, 0.2]).unwrap();
        let j = StochasticDivergenceJ::from_phi(DivergenceFn::kl(), true);
        let small = family_eval_envelope(&j, 1e-6, &x).unwrap();
        assert!((small.value - x.expectation()).abs() < 1e-3);
        let big = family_eval_envelope(&j, 1e6, &x).unwrap();
        assert!((big.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn indicator_family_gives_cvar() {
        let x = DiscreteRv::new(&[-1.0, 0.5, 2.0], &[0.3, 0.5, 0.2]).unwrap();
        let alpha: f64 = 0.6;
        let tau = alpha / (1.0 - alpha);
        let reg = crate::quartet::functional(move |y| indicator_family_regret(tau, y));
        let r = crate::constructions::regret_functional_to_risk(&reg, &x).unwrap();
        assert!((r.value - x.cvar(alpha)).abs() < 1e-7, "{} vs {}", r.value, x.cvar(alpha));
    }
}
