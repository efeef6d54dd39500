//! Portfolio selection and distributionally robust optimization over
//! divergence balls.

use serde::Serialize;

use crate::divergence::{divergence_regret, evar, family_eval_envelope, DivergenceFn, StochasticDivergenceJ};
use crate::error::{QuadError, Result};
use crate::quartet::Quartet;
use crate::rv::DiscreteRv;
use crate::solvers::{
    minimize_convex, minimize_scalar, project_simplex, project_simplex_with_mean, Budget, ConvexOptions,
    LinearProgram, LpStatus, Relation,
};

/// Gap between the regret-form and envelope-form objectives above which the
/// reported density is flagged approximate.
pub const DENSITY_GAP_TOL: f64 = 1e-6;

/// Joint return scenarios: rows are atoms, columns are assets.
#[derive(Clone, Debug, Serialize)]
pub struct Scenarios {
    pub returns: Vec<Vec<f64>>,
    pub probs: Vec<f64>,
}

impl Scenarios {
    pub fn new(returns: Vec<Vec<f64>>, probs: Option<Vec<f64>>) -> Result<Self> {
        let n = returns.len();
        if n == 0 {
            return Err(QuadError::Invalid("no scenarios".into()));
        }
        let m = returns[0].len();
        if m == 0 || returns.iter().any(|r| r.len() != m) {
            return Err(QuadError::Invalid("every scenario needs the same positive number of assets".into()));
        }
        if returns.iter().flatten().any(|v| !v.is_finite()) {
            return Err(QuadError::Invalid("non-finite return".into()));
        }
        let probs = match probs {
            None => vec![1.0 / n as f64; n],
            Some(p) => {
                // validates and normalizes
                DiscreteRv::new(&vec![0.0; p.len()], &p)?;
                if p.len() != n {
                    return Err(QuadError::Invalid(format!("{} probabilities for {n} scenarios", p.len())));
                }
                let s: f64 = p.iter().sum();
                p.iter().map(|v| v / s).collect()
            }
        };
        Ok(Scenarios { returns, probs })
    }

    pub fn assets(&self) -> usize {
        self.returns[0].len()
    }

    pub fn asset_means(&self) -> Vec<f64> {
        (0..self.assets()).map(|j| self.returns.iter().zip(&self.probs).map(|(r, p)| p * r[j]).sum()).collect()
    }

    /// Per-scenario loss `-w . r`.
    pub fn losses(&self, w: &[f64]) -> Vec<f64> {
        self.returns.iter().map(|r| -r.iter().zip(w).map(|(a, b)| a * b).sum::<f64>()).collect()
    }

    pub fn loss_rv(&self, w: &[f64]) -> DiscreteRv {
        DiscreteRv::from_scenarios(&self.losses(w), &self.probs)
    }

    fn check_target(&self, target: Option<f64>) -> Result<()> {
        if let Some(t) = target {
            let mu = self.asset_means();
            let (lo, hi) = mu.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, v| (a.0.min(*v), a.1.max(*v)));
            if !(t >= lo - 1e-12 && t <= hi + 1e-12) {
                return Err(QuadError::Infeasible(format!("target mean {t} outside the asset mean range [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    fn projector(&self, target: Option<f64>) -> impl Fn(&mut [f64]) + '_ {
        let mu = self.asset_means();
        move |w: &mut [f64]| match target {
            Some(t) => project_simplex_with_mean(w, &mu, t),
            None => project_simplex(w),
        }
    }

    fn loss_scale(&self) -> f64 {
        self.returns.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-6)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PortfolioResult {
    pub weights: Vec<f64>,
    pub risk: f64,
    pub method: &'static str,
}

/// Risk measure to minimize over portfolios.
#[derive(Clone)]
pub enum PortfolioRisk {
    /// CVaR at level `alpha`, solved as a linear program.
    Cvar(f64),
    /// Any quadrangle, through `min_{w, C} C + V(l_w - C)`.
    Regret(Quartet),
}

/// `min_w R(-w . r)` over the simplex, with an optional mean-return equality.
pub fn portfolio_optimize(
    risk: &PortfolioRisk,
    s: &Scenarios,
    target: Option<f64>,
    budget: &Budget,
) -> Result<PortfolioResult> {
    s.check_target(target)?;
    match risk {
        PortfolioRisk::Cvar(alpha) => cvar_portfolio_lp(*alpha, s, target),
        PortfolioRisk::Regret(q) => {
            let m = s.assets();
            let obj = |v: &[f64]| {
                let l = DiscreteRv::from_scenarios(
                    &s.losses(&v[..m]).iter().map(|x| x - v[m]).collect::<Vec<_>>(),
                    &s.probs,
                );
                v[m] + q.regret(&l)
            };
            let proj = s.projector(target);
            let project = |v: &mut [f64]| proj(&mut v[..m]);
            let mut x0 = vec![1.0 / m as f64; m + 1];
            x0[m] = s.loss_rv(&x0[..m]).expectation();
            let opts = ConvexOptions::from_budget(s.loss_scale(), budget);
            let res = minimize_convex(obj, project, &x0, &opts);
            let w = res.x[..m].to_vec();
            let risk = q.risk(&s.loss_rv(&w));
            Ok(PortfolioResult { weights: w, risk, method: "regret" })
        }
    }
}

/// LP over `[w (m), C (free), s (n)]`: `min C + E[s] / (1 - alpha)` with
/// `s_i >= l_i(w) - C`, `s >= 0`.
pub fn cvar_portfolio_lp(alpha: f64, s: &Scenarios, target: Option<f64>) -> Result<PortfolioResult> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(QuadError::param("alpha", format!("must lie in [0, 1), got {alpha}")));
    }
    s.check_target(target)?;
    let m = s.assets();
    let n = s.returns.len();
    let mut lp = LinearProgram::new(m + 1 + n);
    lp.free(m);
    let mut c = vec![0.0; m + 1 + n];
    c[m] = 1.0;
    for i in 0..n {
        c[m + 1 + i] = s.probs[i] / (1.0 - alpha);
    }
    lp.minimize(c);
    for i in 0..n {
        // s_i + C + w . r_i >= 0
        let mut row: Vec<(usize, f64)> = (0..m).map(|j| (j, s.returns[i][j])).collect();
        row.push((m, 1.0));
        row.push((m + 1 + i, 1.0));
        lp.constraint_sparse(&row, Relation::Ge, 0.0);
    }
    lp.constraint_sparse(&(0..m).map(|j| (j, 1.0)).collect::<Vec<_>>(), Relation::Eq, 1.0);
    if let Some(t) = target {
        let mu = s.asset_means();
        lp.constraint_sparse(&(0..m).map(|j| (j, mu[j])).collect::<Vec<_>>(), Relation::Eq, t);
    }
    let sol = lp.solve();
    match sol.status {
        LpStatus::Optimal => {
            Ok(PortfolioResult { weights: sol.x[..m].to_vec(), risk: sol.objective, method: "lp" })
        }
        LpStatus::Infeasible => Err(QuadError::Infeasible("portfolio constraints are infeasible".into())),
        LpStatus::Unbounded => Err(QuadError::Unbounded("portfolio LP is unbounded".into())),
        LpStatus::IterationLimit => {
            Err(QuadError::NonConvergence { iterations: sol.pivots, reason: "simplex pivot limit".into() })
        }
    }
}

#[derive(Clone, Debug)]
pub struct DroProblem {
    pub scenarios: Scenarios,
    pub phi: DivergenceFn,
    /// Radius of the ball `{Q : E[Q] = 1, E[phi(Q)] <= tau}`.
    pub tau: f64,
    pub target_mean: Option<f64>,
    pub budget: Budget,
}

#[derive(Clone, Debug, Serialize)]
pub struct DroResult {
    pub weights: Vec<f64>,
    /// `C` at the optimum of the regret form.
    pub threshold: f64,
    /// Regret-form objective `C + V_tau(l_w - C)`.
    pub value: f64,
    /// Support of the ball at the returned loss.
    pub envelope_value: f64,
    /// Worst-case density per scenario.
    pub density: Vec<f64>,
    pub gap: f64,
    pub approximate: bool,
}

/// `min_w sup_{Q in ball} E[Q l_w]`, solved in the regret form
/// `min_{w, C} C + V_tau(l_w - C)`; the worst-case density comes from the
/// envelope at the optimum.
pub fn dro_solve(p: &DroProblem) -> Result<DroResult> {
    if !(p.tau > 0.0) {
        return Err(QuadError::param("tau", format!("must be positive, got {}", p.tau)));
    }
    let s = &p.scenarios;
    s.check_target(p.target_mean)?;
    let m = s.assets();
    let regret_form = |w: &[f64], c: f64| {
        let z: Vec<f64> = s.losses(w).iter().map(|l| l - c).collect();
        c + divergence_regret(&p.phi, p.tau, &DiscreteRv::from_scenarios(&z, &s.probs)).value
    };
    let obj = |v: &[f64]| regret_form(&v[..m], v[m]);
    let proj = s.projector(p.target_mean);
    let project = |v: &mut [f64]| proj(&mut v[..m]);
    let mut x0 = vec![1.0 / m as f64; m + 1];
    x0[m] = s.loss_rv(&x0[..m]).expectation();
    let opts = ConvexOptions::from_budget(s.loss_scale(), &p.budget);
    let res = minimize_convex(obj, project, &x0, &opts);
    let w = res.x[..m].to_vec();
    // polish C for the returned weights
    let (c, value) = minimize_scalar(|c| regret_form(&w, c), res.x[m], 0.1 * s.loss_scale())?;
    let (c, value) = if value <= res.value { (c, value) } else { (res.x[m], res.value) };

    let loss = s.loss_rv(&w);
    let env = family_eval_envelope(&StochasticDivergenceJ::from_phi(p.phi.clone(), true), p.tau, &loss)?;
    let density = s
        .losses(&w)
        .iter()
        .map(|l| {
            let k = loss.values().iter().position(|v| v == l).expect("scenario value is an atom");
            env.density[k]
        })
        .collect();
    let gap = (value - env.value).abs();
    Ok(DroResult {
        weights: w,
        threshold: c,
        value,
        envelope_value: env.value,
        density,
        gap,
        approximate: gap > DENSITY_GAP_TOL,
    })
}

/// `min_w EVaR_beta(l_w)` by direct minimization over the feasible weights.
pub fn evar_portfolio(s: &Scenarios, beta: f64, target: Option<f64>, budget: &Budget) -> Result<PortfolioResult> {
    s.check_target(target)?;
    let m = s.assets();
    let project = s.projector(target);
    let opts = ConvexOptions::from_budget(1.0, budget);
    let res = minimize_convex(|w| evar(&s.loss_rv(w), beta).0, project, &vec![1.0 / m as f64; m], &opts);
    Ok(PortfolioResult { risk: res.value, weights: res.x, method: "evar" })
}

/// Best CVaR over the weight grid of step `1 / steps` for two assets.
pub fn cvar_grid_two_assets(alpha: f64, s: &Scenarios, steps: usize) -> (Vec<f64>, f64) {
    assert_eq!(s.assets(), 2, "grid oracle covers two assets");
    (0..=steps)
        .map(|k| {
            let a = k as f64 / steps as f64;
            let w = vec![a, 1.0 - a];
            let v = s.loss_rv(&w).cvar(alpha);
            (w, v)
        })
        .fold((vec![], f64::INFINITY), |b, it| if it.1 < b.1 { it } else { b })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::Family;

    fn two_assets() -> Scenarios {
        Scenarios::new(vec![vec![0.004, -0.002], vec![-0.008, 0.006], vec![0.01, 0.001]], None).unwrap()
    }

    #[test]
    fn cvar_lp_matches_grid() {
        let s = two_assets();
        let lp = cvar_portfolio_lp(0.5, &s, None).unwrap();
        let (_, g) = cvar_grid_two_assets(0.5, &s, 100);
        assert!(lp.risk <= g + 1e-12 && g - lp.risk < 1e-4, "{} {g}", lp.risk);
        let direct = s.loss_rv(&lp.weights).cvar(0.5);
        assert!((direct - lp.risk).abs() < 1e-12);
    }

    #[test]
    fn regret_route_matches_lp() {
        let s = two_assets();
        let q = Family::Quantile { alpha: 0.5 }.quartet().unwrap();
        let r = portfolio_optimize(&PortfolioRisk::Regret(q), &s, None, &Budget::default()).unwrap();
        let lp = cvar_portfolio_lp(0.5, &s, None).unwrap();
        assert!((r.risk - lp.risk).abs() < 1e-8, "{} {}", r.risk, lp.risk);
    }

    #[test]
    fn single_asset_and_infeasible_target() {
        let s = Scenarios::new(vec![vec![0.1], vec![-0.2]], None).unwrap();
        let r = cvar_portfolio_lp(0.5, &s, None).unwrap();
        assert!((r.weights[0] - 1.0).abs() < 1e-12 && (r.risk - 0.2).abs() < 1e-12);
        assert!(matches!(cvar_portfolio_lp(0.5, &two_assets(), Some(1.0)), Err(QuadError::Infeasible(_))));
    }

    #[test]
    fn dominant_riskless_asset() {
        let s = Scenarios::new(vec![vec![0.02, 0.01], vec![0.02, -0.03]], None).unwrap();
        let r = dro_solve(&DroProblem { scenarios: s, phi: DivergenceFn::kl(), tau: 0.3, target_mean: None, budget: Budget::default() }).unwrap();
        assert!(r.weights[0] > 1.0 - 1e-6, "{:?}", r.weights);
    }

    #[test]
    fn kl_ball_is_evar() {
        let s = two_assets();
        let r =
            dro_solve(&DroProblem {
            scenarios: s.clone(),
            phi: DivergenceFn::kl(),
            tau: 0.5,
            target_mean: None,
            budget: Budget::default(),
        })
        .unwrap();
        let e = evar_portfolio(&s, 0.5, None, &Budget::default()).unwrap();
        assert!(r.gap < 1e-4 && (r.value - e.risk).abs() < 1e-4, "{r:?} {e:?}");
    }
}
