//! Acceptance suite: one line per criterion, nonzero exit on any failure.

use std::time::Instant;

use quadrangle::checks::quadrangle_checks;
use quadrangle::constructions::{mix_quadrangles, regret_functional_to_risk, revert_quadrangles, scale_quadrangle};
use quadrangle::divergence::{
    evar, evar_stationarity, family_eval_envelope, family_eval_perspective,
    generic_divergence_quadrangle, DivergenceFn, StochasticDivergenceJ,
};
use quadrangle::dual::{cvar_envelope, DualKind, Envelope, Shape};
use quadrangle::measures::{expectile_value, qsa_risk, qsau_alpha_samples, qsau_alpha_set, qsau_statistic_union};
use quadrangle::regression::{fit_named, regression_equivalence_check, Dataset, Model};
use quadrangle::robust::{
    cvar_grid_two_assets, cvar_portfolio_lp, dro_solve, epi_regret_to_risk, epi_risk_dual, epi_risk_primal,
    evar_portfolio, DroProblem, EpiSpec, Kernel, Scenarios,
};
use quadrangle::sampling::{random_batch, random_probs, random_values, rng};
use quadrangle::solvers::Budget;
use quadrangle::{cvar_direct, DiscreteRv, Family, ScaleMode};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

/// Running maximum of a violation, with NaN treated as failure.
#[derive(Default)]
struct Worst(f64);

impl Worst {
    fn push(&mut self, v: f64) {
        self.0 = if v.is_nan() { f64::INFINITY } else { self.0.max(v) };
    }
}

fn c1_identities() -> Outcome {
    // a narrow batch puts bias-shifted statistics past the support
    let mut rvs = random_batch(101, 50, 8, -5.0, 5.0);
    rvs.extend(random_batch(102, 50, 6, -0.4, 0.4));
    let mut failures = Vec::new();
    let mut samples = 0;
    for f in Family::defaults() {
        let rows = quadrangle_checks(&f.quartet().unwrap(), Some(&f.error_fn().unwrap()), &rvs);
        for r in rows {
            samples = samples.max(r.samples);
            if !r.pass {
                failures.push(format!("{} / {}: {:.2e} > {:.0e}", f.name(), r.name, r.worst, r.tol));
            }
        }
    }
    if failures.is_empty() {
        outcome(true, format!("9 families x 100 r.v.s ({samples} in domain for the narrowest family)"))
    } else {
        outcome(false, failures.join("; "))
    }
}

fn c2_cvar() -> Outcome {
    let mut worst = Worst::default();
    let mut r = rng(202);
    for x in random_batch(202, 100, 8, -5.0, 5.0) {
        let alpha = r.gen_range(0.01..0.99);
        let q = Family::Quantile { alpha }.quartet().unwrap();
        let via_regret = regret_functional_to_risk(&q.regret_fn(), &x).unwrap().value;
        worst.push((via_regret - cvar_direct(&x, alpha).unwrap()).abs());
    }
    let u = DiscreteRv::uniform(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
    let exact = cvar_direct(&u, 0.6).unwrap();
    let via = regret_functional_to_risk(&Family::Quantile { alpha: 0.6 }.quartet().unwrap().regret_fn(), &u)
        .unwrap()
        .value;
    let pass = worst.0 <= 1e-9 && exact == 4.5 && (via - 4.5).abs() <= 1e-9;
    outcome(pass, format!("max |regret formula - CVaR| = {:.2e}; uniform 1..5 at 0.6 gives {exact}", worst.0))
}

fn c3_expectile() -> Outcome {
    let mut route = Worst::default();
    let mut residual = Worst::default();
    let mut r = rng(303);
    for x in random_batch(303, 50, 8, -5.0, 5.0) {
        let q: f64 = r.gen_range(0.51..0.99);
        let k = (1.0 - q) / (2.0 * q - 1.0);
        let s6 = Family::ExpectileMse { q }.quartet().unwrap().statistic(&x);
        let s7 = Family::ExpectilePl { k }.quartet().unwrap().statistic(&x);
        route.push((s6.lo - s7.lo).abs().max((s6.hi - s7.hi).abs()));
        let c = s6.midpoint();
        residual.push((q * x.expect(|v| (v - c).max(0.0)) - (1.0 - q) * x.expect(|v| (c - v).max(0.0))).abs());
    }
    let b = DiscreteRv::uniform(&[0.0, 1.0]).unwrap();
    let e = Family::ExpectileMse { q: 0.75 }.quartet().unwrap().statistic(&b);
    let pass = route.0 <= 1e-7 && residual.0 <= 1e-8 && (e.lo - 0.75).abs() <= 1e-12 && e.is_point();
    outcome(
        pass,
        format!("route gap {:.2e}, defining-equation residual {:.2e}, e_0.75 of {{0,1}} = {}", route.0, residual.0, e.lo),
    )
}

fn c4_perspective() -> Outcome {
    let mut worst = Worst::default();
    let parent = |x: &DiscreteRv| x.expect(|v| v * v);
    for x in random_batch(404, 20, 8, -5.0, 5.0) {
        for tau in [0.25, 1.0, 4.0] {
            let v = family_eval_perspective(parent, tau, &x).unwrap().value;
            worst.push((v - 2.0 * tau.sqrt() * x.l2_norm()).abs());
        }
    }
    outcome(worst.0 <= 1e-8, format!("max |F_tau - 2 sqrt(tau) |X|_2| = {:.2e} over 60 cases", worst.0))
}

fn c5_divergence_closed_forms() -> Outcome {
    let rvs = random_batch(505, 10, 6, -3.0, 3.0);
    let mut tv = Worst::default();
    let mut ep = Worst::default();
    let mut gep = Worst::default();
    let mut gep_beta = Worst::default();
    let mut stat = Worst::default();
    for x in &rvs {
        for beta in [0.5, 1.0, 1.5] {
            let generic = generic_divergence_quadrangle(&DivergenceFn::tv(), beta).unwrap().risk(x);
            let h = beta / 2.0;
            tv.push((generic - (h * x.ess_sup() + (1.0 - h) * x.cvar(h))).abs());
            let generic = generic_divergence_quadrangle(&DivergenceFn::extended_pearson(), beta).unwrap().risk(x);
            ep.push((generic - (x.expectation() + (beta * x.variance()).sqrt())).abs());
        }
        let q = 0.7;
        let phi = DivergenceFn::gen_extended_pearson(q).unwrap();
        let e = expectile_value(x, q).unwrap();
        let stats: Vec<f64> = [0.5, 1.0, 2.0]
            .iter()
            .map(|&b| generic_divergence_quadrangle(&phi, b).unwrap().statistic(x).midpoint())
            .collect();
        for s in &stats {
            gep.push((s - e).abs());
        }
        let spread = stats.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - stats.iter().cloned().fold(f64::INFINITY, f64::min);
        gep_beta.push(spread);
        for beta in [0.1, 0.5, 2.0] {
            let (_, l) = evar(x, beta);
            if l > 0.0 {
                stat.push(evar_stationarity(x, beta, l).abs());
            }
        }
    }
    let pass = tv.0 <= 1e-6 && ep.0 <= 1e-6 && gep.0 <= 1e-6 && gep_beta.0 <= 1e-6 && stat.0 <= 1e-6;
    outcome(
        pass,
        format!(
            "tv {:.2e}, extended pearson {:.2e}, expectile statistic {:.2e} (spread over beta {:.2e}), evar stationarity {:.2e}",
            tv.0, ep.0, gep.0, gep_beta.0, stat.0
        ),
    )
}

fn c6_limits() -> Outcome {
    let mut worst_lo = Worst::default();
    let mut worst_hi = Worst::default();
    for name in ["kl", "tv"] {
        let j = StochasticDivergenceJ::from_phi(DivergenceFn::named(name, None).unwrap(), true);
        for x in random_batch(606, 20, 8, 0.0, 1.0) {
            let small = family_eval_envelope(&j, 1e-6, &x).unwrap().value;
            let large = family_eval_envelope(&j, 1e6, &x).unwrap().value;
            worst_lo.push((small - x.expectation()).abs());
            worst_hi.push((large - x.ess_sup()).abs());
        }
    }
    outcome(
        worst_lo.0 <= 1e-3 && worst_hi.0 <= 1e-3,
        format!("tau=1e-6 vs mean {:.2e}; tau=1e6 vs ess sup {:.2e}", worst_lo.0, worst_hi.0),
    )
}

/// `max E[Q X]` over densities `Q = r / p` with `r` on the simplex grid of
/// step `1/steps` and `KL(r | p) <= tau`, for three atoms.
fn kl_grid(x: &DiscreteRv, tau: f64, steps: usize) -> f64 {
    let p = x.probs();
    let v = x.values();
    let mut best = f64::NEG_INFINITY;
    for a in 0..=steps {
        for b in 0..=(steps - a) {
            let r = [a as f64 / steps as f64, b as f64 / steps as f64, (steps - a - b) as f64 / steps as f64];
            let kl: f64 = r.iter().zip(p).filter(|(ri, _)| **ri > 0.0).map(|(ri, pi)| ri * (ri / pi).ln()).sum();
            if kl <= tau {
                best = best.max(r.iter().zip(v).map(|(ri, vi)| ri * vi).sum());
            }
        }
    }
    best
}

fn c7_envelopes() -> Outcome {
    let mut lp = Worst::default();
    let mut r = rng(707);
    for x in random_batch(707, 30, 8, -5.0, 5.0) {
        let alpha = r.gen_range(0.01..0.99);
        let s = cvar_envelope(alpha).unwrap().support(&x).unwrap().value;
        lp.push((s - cvar_direct(&x, alpha).unwrap()).abs());
    }
    let j = StochasticDivergenceJ::from_phi(DivergenceFn::kl(), true);
    let parent = |x: &DiscreteRv| {
        let m = x.ess_sup();
        m + x.expect(|v| (v - m).exp()).ln()
    };
    let mut pe = Worst::default();
    let mut above = Worst(f64::NEG_INFINITY);
    let mut below = Worst(f64::NEG_INFINITY);
    let steps = 200;
    for _ in 0..10 {
        let p = random_probs(&mut r, 3);
        let v = random_values(&mut r, 3, -2.0, 2.0);
        let x = DiscreteRv::new(&v, &p).unwrap();
        if x.len() < 3 {
            continue;
        }
        let tau = r.gen_range(0.05..1.0);
        let persp = family_eval_perspective(parent, tau, &x).unwrap().value;
        let env = family_eval_envelope(&j, tau, &x).unwrap().value;
        pe.push((persp - env).abs());
        let grid = kl_grid(&x, tau, steps);
        above.push(grid - env);
        // one grid step moves E[Q X] by at most the value range over the step
        let resolution = 2.0 * (x.ess_sup() - x.ess_inf()) / steps as f64;
        below.push((env - grid) - resolution);
    }
    let pass = lp.0 <= 1e-7 && pe.0 <= 1e-5 && above.0 <= 1e-9 && below.0 <= 0.0;
    outcome(
        pass,
        format!(
            "cvar LP {:.2e}; perspective vs envelope {:.2e}; grid minus envelope {:.2e} (must be <= 1e-9); envelope minus grid minus resolution {:.2e} (must be <= 0)",
            lp.0, pe.0, above.0, below.0
        ),
    )
}

fn c8_constructions() -> Outcome {
    let q1 = Family::Quantile { alpha: 0.7 }.quartet().unwrap();
    let q2 = Family::ExpectileMse { q: 0.6 }.quartet().unwrap();
    let q3 = Family::MeanPl.quartet().unwrap();
    let mix = mix_quadrangles(&[q1.clone(), q2.clone(), q3.clone()], &[0.5, 0.3, 0.2]).unwrap();
    let lambda = 0.6;
    let aff = scale_quadrangle(&q2, lambda, ScaleMode::Affine).unwrap();
    let rev = revert_quadrangles(&q1, &q2);
    let mut mixed = Worst::default();
    let mut affine_exact = true;
    let mut reverted = Worst::default();
    for x in random_batch(808, 30, 8, -5.0, 5.0) {
        let want = 0.5 * q1.risk(&x) + 0.3 * q2.risk(&x) + 0.2 * q3.risk(&x);
        mixed.push((mix.risk(&x) - want).abs());
        let m = x.expectation();
        affine_exact &= aff.risk(&x) == (1.0 - lambda) * m + lambda * q2.risk(&x);
        affine_exact &= aff.deviation(&x) == lambda * q2.deviation(&x);
        affine_exact &= aff.regret(&x) == (1.0 - lambda) * m + lambda * q2.regret(&x);
        affine_exact &= aff.error(&x) == lambda * q2.error(&x);
        affine_exact &= aff.statistic(&x) == q2.statistic(&x);
        reverted.push((rev.deviation(&x) - 0.5 * (q1.deviation(&x) + q2.deviation(&x.neg()))).abs());
    }
    outcome(
        mixed.0 <= 1e-7 && affine_exact && reverted.0 <= 1e-7,
        format!("mix {:.2e}; affine exact: {affine_exact}; reverted {:.2e}", mixed.0, reverted.0),
    )
}

fn random_dataset<R: Rng>(r: &mut R) -> Dataset {
    let n = r.gen_range(5..=8);
    let m = r.gen_range(1..=2);
    let coef: Vec<f64> = (0..m).map(|_| r.gen_range(-2.0..2.0)).collect();
    let features: Vec<Vec<f64>> = (0..n).map(|_| (0..m).map(|_| r.gen_range(-3.0..3.0)).collect()).collect();
    let target = features
        .iter()
        .map(|row| row.iter().zip(&coef).map(|(a, b)| a * b).sum::<f64>() + 0.5 + r.gen_range(-1.0..1.0))
        .collect();
    Dataset::new(features, target, None).unwrap()
}

fn c9_regression() -> Outcome {
    let mut r = rng(909);
    let mut gap = Worst::default();
    let mut tracks = true;
    let families =
        [Family::Quantile { alpha: 0.3 }, Family::Qsau { eps: 0.2 }, Family::ExpectilePl { k: 0.5 }];
    for _ in 0..20 {
        let data = random_dataset(&mut r);
        for f in families {
            let rep = regression_equivalence_check(&f.quartet().unwrap(), &f.error_fn().unwrap(), &data).unwrap();
            gap.push(rep.gap);
            tracks &= rep.statistic_contains_zero;
        }
    }
    // intercept-only quantile regression against a search over breakpoints
    let mut exact = true;
    for x in random_batch(910, 20, 8, -5.0, 5.0) {
        let alpha = r.gen_range(0.05..0.95);
        let data = Dataset::intercept_only(x.values().to_vec(), Some(x.probs().to_vec())).unwrap();
        let fit = fit_named(Model::Quantile { alpha }, &data).unwrap();
        let err = Family::Quantile { alpha }.error_fn().unwrap();
        let best =
            x.values().iter().map(|c| err.value(&data.residual_rv(*c, &[]))).fold(f64::INFINITY, f64::min);
        exact &= x.values().contains(&fit.intercept) && fit.objective == best;
    }
    outcome(
        gap.0 <= 1e-6 && tracks && exact,
        format!("max objective gap {:.2e}; statistic contains zero: {tracks}; LP = breakpoint search: {exact}", gap.0),
    )
}

fn c10_svr() -> Outcome {
    let mut inside = true;
    let mut spread = Worst::default();
    let mut r = rng(1010);
    let mut cases = 0;
    for x in random_batch(1010, 40, 8, -5.0, 5.0) {
        let (lo, hi) = x.ess_bounds();
        // half a gap between two atoms puts a whole segment of levels in the set
        let v = x.values();
        let (i, j) = (r.gen_range(0..v.len()), r.gen_range(0..v.len()));
        let gap = 0.5 * (v[i.max(j)] - v[i.min(j)]);
        let eps = if r.gen_bool(0.5) && gap < 0.5 * (hi - lo) { gap } else { r.gen_range(0.0..0.5 * (hi - lo)) };
        let data = Dataset::intercept_only(x.values().to_vec(), Some(x.probs().to_vec())).unwrap();
        let fit = fit_named(Model::Svr { eps }, &data).unwrap();
        let union = qsau_statistic_union(&x, eps);
        inside &= union.iter().any(|s| s.contains(fit.intercept, 1e-9));
        let mut levels = qsau_alpha_samples(&x, eps);
        for part in qsau_alpha_set(&x, eps) {
            if part.hi > part.lo {
                levels.push(part.lo + 0.25 * (part.hi - part.lo));
                levels.push(part.lo + 0.75 * (part.hi - part.lo));
            }
        }
        let risks: Vec<f64> = levels.iter().map(|&a| qsa_risk(&x, a) - (1.0 - a) * eps).collect();
        if risks.len() > 1 {
            cases += 1;
        }
        let s = risks.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - risks.iter().cloned().fold(f64::INFINITY, f64::min);
        spread.push(s);
    }
    outcome(
        inside && spread.0 <= 1e-6,
        format!("optimum in statistic union: {inside}; risk spread over levels {:.2e} ({cases} multi-level cases)", spread.0),
    )
}

/// Maximize a concave `f` over `[lo, hi]^d` by grid search with repeated
/// zooming around the best point.
fn zoom_grid<F: Fn(&[f64]) -> f64>(f: F, d: usize, lo: f64, hi: f64, points: usize, rounds: usize) -> f64 {
    let mut center = vec![0.5 * (lo + hi); d];
    let mut half = 0.5 * (hi - lo);
    let mut best = f64::NEG_INFINITY;
    for _ in 0..rounds {
        let mut arg = center.clone();
        let total = points.pow(d as u32);
        for k in 0..total {
            let mut idx = k;
            let q: Vec<f64> = (0..d)
                .map(|j| {
                    let i = idx % points;
                    idx /= points;
                    (center[j] - half + 2.0 * half * i as f64 / (points - 1) as f64).clamp(lo, hi)
                })
                .collect();
            let v = f(&q);
            if v > best {
                best = v;
                arg = q;
            }
        }
        center = arg;
        half *= 0.1;
    }
    best
}

fn c11_epi() -> Outcome {
    let mut r = rng(1111);
    let alpha = 0.5;
    let hi = 1.0 / (1.0 - alpha);
    let kernels = || {
        vec![
            Kernel::Phi(DivergenceFn::kl()),
            Kernel::Phi(DivergenceFn::pearson()),
            Kernel::Envelope(Envelope::new(
                "mean_l2",
                DualKind::Regret,
                Shape::Ball { center: 1.0, radius: 1.0, mean: None },
            )),
        ]
    };
    let mut constant_exact = true;
    let mut order = Worst::default();
    let mut pd = Worst::default();
    let mut grid_gap = Worst::default();
    let mut identity = Worst::default();
    let mut cases = 0;
    for _ in 0..4 {
        for n in [2usize, 3] {
            let p = random_probs(&mut r, n);
            let v = random_values(&mut r, n, -2.0, 2.0);
            let x = DiscreteRv::new(&v, &p).unwrap();
            let eps = r.gen_range(0.2..3.0);
            for kernel in kernels() {
                let spec = EpiSpec::new(cvar_envelope(alpha).unwrap(), kernel.clone(), eps).unwrap();
                let c = r.gen_range(-3.0..3.0);
                constant_exact &= epi_risk_primal(&spec, &DiscreteRv::constant(c)).unwrap() == c;
                let primal = epi_risk_primal(&spec, &x).unwrap();
                let dual = epi_risk_dual(&spec, &x).unwrap();
                order.push((x.expectation() - primal).max(primal - x.cvar(alpha)).max(0.0));
                pd.push((primal - dual).abs());
                // grid over the first n - 1 densities, the last fixed by E[Q] = 1
                let probs = x.probs().to_vec();
                let vals = x.values().to_vec();
                let m = probs.len();
                let objective = |q: &[f64]| {
                    let head: f64 = q.iter().zip(&probs).map(|(a, b)| a * b).sum();
                    let last = (1.0 - head) / probs[m - 1];
                    if !(0.0..=hi).contains(&last) {
                        return f64::NEG_INFINITY;
                    }
                    let full: Vec<f64> = q.iter().copied().chain([last]).collect();
                    let lin: f64 = full.iter().zip(&probs).zip(&vals).map(|((a, b), c)| a * b * c).sum();
                    let pen = match &kernel {
                        Kernel::Phi(phi) => full.iter().zip(&probs).map(|(a, b)| b * phi.phi(*a)).sum::<f64>() / eps,
                        Kernel::Envelope(_) => {
                            let d: f64 = full.iter().zip(&probs).map(|(a, b)| b * (a - 1.0).powi(2)).sum();
                            if d <= 1.0 {
                                0.0
                            } else {
                                f64::INFINITY
                            }
                        }
                    };
                    lin - pen
                };
                let grid = zoom_grid(objective, m - 1, 0.0, hi, if m == 2 { 2001 } else { 201 }, 6);
                grid_gap.push((grid - dual).abs().max((grid - primal).abs()));
                cases += 1;
            }
            let reg_env =
                Envelope::new("cvar_regret", DualKind::Regret, Shape::Box { lo: 0.0, hi, mean: None });
            if n == 3 {
                let risk_spec = EpiSpec::new(cvar_envelope(alpha).unwrap(), Kernel::Phi(DivergenceFn::kl()), eps).unwrap();
                let reg_spec = EpiSpec::new(reg_env, Kernel::Phi(DivergenceFn::kl()), eps).unwrap();
                let a = epi_risk_primal(&risk_spec, &x).unwrap();
                let b = epi_regret_to_risk(&reg_spec, &x).unwrap();
                identity.push((a - b).abs());
            }
        }
    }
    let pass = constant_exact && order.0 <= 1e-9 && pd.0 <= 1e-4 && grid_gap.0 <= 1e-4 && identity.0 <= 1e-5;
    outcome(
        pass,
        format!(
            "constant exact: {constant_exact}; mean <= value <= risk slack {:.2e}; primal/dual {:.2e}; vs grid {:.2e} ({cases} cases); regret projection {:.2e}",
            order.0, pd.0, grid_gap.0, identity.0
        ),
    )
}

fn c12_dro() -> Outcome {
    let mut r = rng(1212);
    let mut route = Worst::default();
    let mut kl_evar = Worst::default();
    let mut grid = Worst::default();
    for _ in 0..5 {
        let returns: Vec<Vec<f64>> = (0..3).map(|_| random_values(&mut r, 2, -0.01, 0.01)).collect();
        let s = Scenarios::new(returns, Some(random_probs(&mut r, 3))).unwrap();
        let tau = r.gen_range(0.1..1.0);
        let res = dro_solve(&DroProblem {
            scenarios: s.clone(),
            phi: DivergenceFn::kl(),
            tau,
            target_mean: None,
            budget: Budget::default(),
        })
        .unwrap();
        route.push(res.gap);
        let direct = evar_portfolio(&s, tau, None, &Budget::default()).unwrap();
        kl_evar.push((res.value - direct.risk).abs());
        let tv = dro_solve(&DroProblem {
            scenarios: s.clone(),
            phi: DivergenceFn::tv(),
            tau: 0.5 * tau,
            target_mean: None,
            budget: Budget::default(),
        })
        .unwrap();
        route.push(tv.gap);
        let alpha = r.gen_range(0.1..0.9);
        let lp = cvar_portfolio_lp(alpha, &s, None).unwrap();
        let (_, g) = cvar_grid_two_assets(alpha, &s, 100);
        // the grid contains no point better than the LP optimum beyond rounding
        grid.push((lp.risk - g - 1e-12).max(g - lp.risk - 1e-4).max(0.0));
    }
    outcome(
        route.0 <= 1e-4 && kl_evar.0 <= 1e-4 && grid.0 == 0.0,
        format!(
            "regret vs envelope form {:.2e}; KL ball vs EVaR {:.2e}; LP within grid tolerance: {}",
            route.0,
            kl_evar.0,
            grid.0 == 0.0
        ),
    )
}

fn main() {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("quadrangle identities and statistic routes", c1_identities),
        ("CVaR by the regret formula", c2_cvar),
        ("expectile routes agree", c3_expectile),
        ("perspective of E[X^2]", c4_perspective),
        ("divergence closed forms", c5_divergence_closed_forms),
        ("divergence family limits", c6_limits),
        ("envelope duality", c7_envelopes),
        ("mixing, scaling, reverting", c8_constructions),
        ("regression equivalence", c9_regression),
        ("insensitive-loss regression levels", c10_svr),
        ("epi-regularization", c11_epi),
        ("distributionally robust portfolios", c12_dro),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "[{}] criterion {:>2}: {name}: {} ({:.1}s)",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
