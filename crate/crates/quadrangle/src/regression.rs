//! Linear regression by error minimization over affine predictors.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::constructions::ErrorFn;
use crate::error::{QuadError, Result};
use crate::loss::{PwlError, ScalarLoss};
use crate::measures::Family;
use crate::quartet::Quartet;
use crate::rv::{DiscreteRv, StatInterval};
use crate::solvers::{minimize_convex, Budget, ConvexOptions, LinearProgram, LpStatus, Relation};

/// Tolerance for `0 in S(Z)` in tracking checks.
pub const TRACK_TOL: f64 = 1e-7;

/// Observations `(x_i, y_i)` with probabilities `p_i`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Dataset {
    pub features: Vec<Vec<f64>>,
    pub target: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Dataset {
    pub fn new(features: Vec<Vec<f64>>, target: Vec<f64>, weights: Option<Vec<f64>>) -> Result<Self> {
        let n = target.len();
        if n == 0 {
            return Err(QuadError::Invalid("dataset has no rows".into()));
        }
        if features.len() != n {
            return Err(QuadError::Invalid(format!("{} feature rows for {n} targets", features.len())));
        }
        let m = features[0].len();
        if let Some(i) = features.iter().position(|r| r.len() != m) {
            return Err(QuadError::Invalid(format!("row {i} has {} features, expected {m}", features[i].len())));
        }
        if features.iter().flatten().chain(&target).any(|v| !v.is_finite()) {
            return Err(QuadError::Invalid("non-finite value in dataset".into()));
        }
        let weights = match weights {
            None => vec![1.0 / n as f64; n],
            Some(w) => {
                if w.len() != n || w.iter().any(|v| !(*v >= 0.0)) {
                    return Err(QuadError::Invalid("weights must be non-negative, one per row".into()));
                }
                let s: f64 = w.iter().sum();
                if (s - 1.0).abs() > crate::rv::PROB_SUM_TOL {
                    return Err(QuadError::Probability { sum: s });
                }
                w.iter().map(|v| v / s).collect()
            }
        };
        Ok(Dataset { features, target, weights })
    }

    /// Intercept-only dataset.
    pub fn intercept_only(target: Vec<f64>, weights: Option<Vec<f64>>) -> Result<Self> {
        let n = target.len();
        Self::new(vec![Vec::new(); n], target, weights)
    }

    pub fn rows(&self) -> usize {
        self.target.len()
    }

    pub fn regressors(&self) -> usize {
        self.features[0].len()
    }

    /// `y_i - c0 - c . x_i`.
    pub fn residuals(&self, intercept: f64, coefficients: &[f64]) -> Vec<f64> {
        self.features
            .iter()
            .zip(&self.target)
            .map(|(x, y)| y - intercept - x.iter().zip(coefficients).map(|(a, b)| a * b).sum::<f64>())
            .collect()
    }

    pub fn residual_rv(&self, intercept: f64, coefficients: &[f64]) -> DiscreteRv {
        DiscreteRv::from_scenarios(&self.residuals(intercept, coefficients), &self.weights)
    }

    pub fn shift_target(&self, c: f64) -> Dataset {
        Dataset { target: self.target.iter().map(|y| y + c).collect(), ..self.clone() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FitResult {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub objective: f64,
    #[serde(skip)]
    pub residual: DiscreteRv,
    /// Statistic of the residual under the fitted error's quadrangle.
    pub statistic: StatInterval,
    /// The intercept is not unique when the residual statistic has width.
    pub non_unique: bool,
    pub method: &'static str,
}

/// Pieces of the error when it is an expectation-type or max-of-expectations
/// piecewise linear functional.
fn pwl_form(err: &ErrorFn) -> Option<PwlError> {
    if let Some(p) = &err.pwl {
        return Some(p.clone());
    }
    err.loss.as_ref().and_then(|l| l.pieces()).map(|p| PwlError::single(p.to_vec()))
}

/// `min_{c0, c} E(Y - c0 - c X)`: LP for piecewise linear errors, otherwise a
/// convex solve from the least-squares start with multiple restarts.
pub fn fit_linear(err: &ErrorFn, data: &Dataset) -> Result<FitResult> {
    fit_linear_with(err, data, &Budget::default())
}

pub fn fit_linear_with(err: &ErrorFn, data: &Dataset, budget: &Budget) -> Result<FitResult> {
    let (b, method) = match pwl_form(err) {
        Some(pwl) => (snap_vertex(err, data, fit_pwl(&pwl, data, 0.0)?.0), "lp"),
        None => (fit_generic(err, data, budget)?, "convex"),
    };
    Ok(finish(err, data, b, method))
}

fn finish(err: &ErrorFn, data: &Dataset, b: Vec<f64>, method: &'static str) -> FitResult {
    let residual = data.residual_rv(b[0], &b[1..]);
    let objective = err.value(&residual);
    let statistic = crate::constructions::project_error(err, &residual)
        .map(|p| p.statistic)
        .unwrap_or(StatInterval::point(f64::NAN));
    FitResult {
        intercept: b[0],
        coefficients: b[1..].to_vec(),
        objective,
        residual,
        statistic,
        non_unique: statistic.width() > TRACK_TOL,
        method,
    }
}

/// Re-solve the square system of the rows the LP vertex interpolates, so the
/// coefficients fit those rows exactly instead of up to pivot rounding. Kept
/// unless the error gets worse by more than rounding.
fn snap_vertex(err: &ErrorFn, data: &Dataset, b: Vec<f64>) -> Vec<f64> {
    let nb = b.len();
    let r = data.residuals(b[0], &b[1..]);
    let scale = data.target.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let mut order: Vec<usize> = (0..r.len()).collect();
    order.sort_by(|&i, &j| r[i].abs().total_cmp(&r[j].abs()));
    let a = design(data);
    let mut rows: Vec<usize> = Vec::with_capacity(nb);
    for &i in &order {
        if rows.len() == nb || r[i].abs() > 1e-8 * scale {
            break;
        }
        rows.push(i);
        let sub = DMatrix::from_fn(rows.len(), nb, |k, j| a[(rows[k], j)]);
        if sub.rank(1e-10) < rows.len() {
            rows.pop();
        }
    }
    if rows.len() < nb {
        return b;
    }
    let sub = DMatrix::from_fn(nb, nb, |k, j| a[(rows[k], j)]);
    let rhs = DVector::from_fn(nb, |k, _| data.target[rows[k]]);
    let Some(snapped) = sub.lu().solve(&rhs) else { return b };
    let snapped: Vec<f64> = snapped.iter().copied().collect();
    let before = err.value(&data.residual_rv(b[0], &b[1..]));
    let after = err.value(&data.residual_rv(snapped[0], &snapped[1..]));
    if after <= before + 4.0 * f64::EPSILON * before.abs().max(1.0) {
        snapped
    } else {
        b
    }
}

/// LP over `[b (free, 1 + m), t (free, terms x rows), u (free)]` minimizing
/// `u + mean_shift * E[Z]` with `u >= sum_i p_i t_ji + c_j` and
/// `t_ji >= a z_i + b` for every piece. Returns `b` and the optimal value.
fn fit_pwl(pwl: &PwlError, data: &Dataset, mean_shift: f64) -> Result<(Vec<f64>, f64)> {
    let n = data.rows();
    let m = data.regressors();
    let nb = 1 + m;
    let nt = pwl.terms.len() * n;
    let u = nb + nt;
    let mut lp = LinearProgram::new(nb + nt + 1);
    for j in 0..lp.num_vars() {
        lp.free(j);
    }
    let mut c = vec![0.0; nb + nt + 1];
    c[u] = 1.0;
    // E[Z] = E[Y] - b . E[(1, X)]
    for i in 0..n {
        c[0] += mean_shift * data.weights[i];
        for k in 0..m {
            c[1 + k] += mean_shift * data.weights[i] * data.features[i][k];
        }
    }
    lp.minimize(c);
    for (j, term) in pwl.terms.iter().enumerate() {
        let mut row: Vec<(usize, f64)> = vec![(u, 1.0)];
        for i in 0..n {
            let t = nb + j * n + i;
            row.push((t, -data.weights[i]));
            for &(a, bb) in &term.pieces {
                // t >= a (y - b0 - b . x) + bb
                let mut r = vec![(t, 1.0), (0, a)];
                for k in 0..m {
                    r.push((1 + k, a * data.features[i][k]));
                }
                lp.constraint_sparse(&r, Relation::Ge, a * data.target[i] + bb);
            }
        }
        lp.constraint_sparse(&row, Relation::Ge, term.constant);
    }
    let sol = lp.solve();
    match sol.status {
        LpStatus::Optimal => {
            let ey: f64 = data.target.iter().zip(&data.weights).map(|(a, b)| a * b).sum();
            Ok((sol.x[..nb].to_vec(), sol.objective - mean_shift * ey))
        }
        LpStatus::Unbounded => Err(QuadError::Unbounded("regression LP is unbounded".into())),
        LpStatus::Infeasible => Err(QuadError::Infeasible("regression LP is infeasible".into())),
        LpStatus::IterationLimit => {
            Err(QuadError::NonConvergence { iterations: sol.pivots, reason: "simplex pivot limit".into() })
        }
    }
}

fn design(data: &Dataset) -> DMatrix<f64> {
    let n = data.rows();
    let m = data.regressors();
    DMatrix::from_fn(n, 1 + m, |i, j| if j == 0 { 1.0 } else { data.features[i][j - 1] })
}

/// Weighted least squares; minimum-norm solution when the design is singular.
pub fn least_squares(data: &Dataset) -> Vec<f64> {
    let a = design(data);
    let w = DVector::from_vec(data.weights.iter().map(|v| v.sqrt()).collect());
    let aw = DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * w[i]);
    let yw = DVector::from_fn(a.nrows(), |i, _| data.target[i] * w[i]);
    let svd = aw.svd(true, true);
    match svd.solve(&yw, 1e-12) {
        Ok(b) => b.iter().copied().collect(),
        Err(_) => vec![0.0; a.ncols()],
    }
}

const RESTARTS: u64 = 5;

fn fit_generic(err: &ErrorFn, data: &Dataset, budget: &Budget) -> Result<Vec<f64>> {
    let obj = |b: &[f64]| err.value(&data.residual_rv(b[0], &b[1..]));
    let start = least_squares(data);
    let spread = {
        let (lo, hi) = data.target.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, v| (a.0.min(*v), a.1.max(*v)));
        (hi - lo).max(1e-3)
    };
    let mut best: Option<(Vec<f64>, f64)> = None;
    for k in 0..RESTARTS {
        let seed = budget.seed.wrapping_add(k);
        let mut x0 = start.clone();
        if k > 0 {
            let mut r = crate::sampling::rng(seed);
            let jitter = crate::sampling::random_values(&mut r, x0.len(), -0.1 * spread, 0.1 * spread);
            x0.iter_mut().zip(jitter).for_each(|(a, j)| *a += j);
        }
        let opts = ConvexOptions::from_budget(0.25 * spread, &Budget { seed, ..*budget });
        let res = minimize_convex(obj, |_: &mut [f64]| {}, &x0, &opts);
        if best.as_ref().is_none_or(|b| res.value < b.1) {
            best = Some((res.x, res.value));
        }
    }
    let (mut b, _) = best.expect("at least one start");
    if let Some(loss) = &err.loss {
        newton_polish(loss, data, &mut b);
    }
    Ok(b)
}

/// Newton steps on `E[e(Z)]` with curvature from differenced one-sided
/// derivatives. Exact in finitely many steps for piecewise quadratic losses.
fn newton_polish(loss: &ScalarLoss, data: &Dataset, b: &mut Vec<f64>) {
    let a = design(data);
    let k = a.ncols();
    let obj = |b: &[f64]| -> f64 {
        data.residuals(b[0], &b[1..]).iter().zip(&data.weights).map(|(z, p)| p * loss.value(*z)).sum()
    };
    let mut f = obj(b);
    for _ in 0..60 {
        let z = data.residuals(b[0], &b[1..]);
        let mut g: DVector<f64> = DVector::zeros(k);
        let mut h: DMatrix<f64> = DMatrix::zeros(k, k);
        for i in 0..z.len() {
            let p = data.weights[i];
            let d1 = 0.5 * (loss.left_derivative(z[i]) + loss.right_derivative(z[i]));
            let step = 1e-6 * (1.0 + z[i].abs());
            let d2 = (loss.right_derivative(z[i] + step) - loss.left_derivative(z[i] - step)) / (2.0 * step);
            for r in 0..k {
                g[r] -= p * d1 * a[(i, r)];
                for c in 0..k {
                    h[(r, c)] += p * d2 * a[(i, r)] * a[(i, c)];
                }
            }
        }
        let Some(d) = h.clone().lu().solve(&(-&g)) else { return };
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..30 {
            let cand: Vec<f64> = b.iter().zip(d.iter()).map(|(x, s)| x + t * s).collect();
            let fc = obj(&cand);
            if fc < f || (fc == f && cand != *b) {
                moved = fc < f;
                *b = cand;
                f = fc;
                break;
            }
            t *= 0.5;
        }
        if !moved {
            return;
        }
    }
}

/// Outcome of solving both sides of the regression equivalence.
#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceReport {
    /// `min E(Z_f)` over affine `f`.
    pub error_objective: f64,
    /// `min D(Z_f)` over affine `f` with `0 in S(Z_f)`.
    pub deviation_objective: f64,
    pub gap: f64,
    /// `0 in S(Z_f)` at the constrained solution.
    pub statistic_contains_zero: bool,
    pub deviation_coefficients: Vec<f64>,
    pub deviation_intercept: f64,
}

/// Solve `min E(Z_f)` and, independently, `min D(Z_f)` over slopes with the
/// intercept placed in the residual statistic; report both objectives.
pub fn regression_equivalence_check(quartet: &Quartet, err: &ErrorFn, data: &Dataset) -> Result<EquivalenceReport> {
    let fit = fit_linear(err, data)?;
    let coefficients = match pwl_form(err) {
        // D(Z) = min_C {C + V(Z - C)} - E[Z]: regret pieces, minus the mean
        Some(pwl) => fit_pwl(&pwl.to_regret(), data, 1.0)?.0[1..].to_vec(),
        None => {
            let m = data.regressors();
            let obj = |c: &[f64]| quartet.deviation(&data.residual_rv(0.0, c));
            if m == 0 {
                Vec::new()
            } else {
                let x0 = least_squares(data)[1..].to_vec();
                minimize_convex(obj, |_: &mut [f64]| {}, &x0, &ConvexOptions::default()).x
            }
        }
    };
    let z = data.residual_rv(0.0, &coefficients);
    let deviation_objective = quartet.deviation(&z);
    let s = quartet.statistic(&z);
    let intercept = s.midpoint();
    let shifted = data.residual_rv(intercept, &coefficients);
    let contains = quartet.statistic(&shifted).contains(0.0, TRACK_TOL);
    Ok(EquivalenceReport {
        error_objective: fit.objective,
        deviation_objective,
        gap: (fit.objective - deviation_objective).abs(),
        statistic_contains_zero: contains,
        deviation_coefficients: coefficients,
        deviation_intercept: intercept,
    })
}

/// `0 in S(Z)` for the fitted residual under `quartet`.
pub fn track_statistic(fit: &FitResult, quartet: &Quartet) -> bool {
    quartet.statistic(&fit.residual).contains(0.0, TRACK_TOL)
}

/// Named estimators.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum Model {
    Quantile { alpha: f64 },
    ExpectilePl { k: f64 },
    ExpectileMse { q: f64 },
    Svr { eps: f64 },
    MeanPl,
    BiasedMean { x: f64 },
}

impl Model {
    pub fn family(&self) -> Family {
        match *self {
            Model::Quantile { alpha } => Family::Quantile { alpha },
            Model::ExpectilePl { k } => Family::ExpectilePl { k },
            Model::ExpectileMse { q } => Family::ExpectileMse { q },
            Model::Svr { eps } => Family::Qsau { eps },
            Model::MeanPl => Family::MeanPl,
            Model::BiasedMean { x } => Family::BiasedMean { x },
        }
    }

    pub fn from_name(name: &str, get: &dyn Fn(&str) -> Option<f64>) -> Result<Model> {
        let family = match name {
            "svr" => Family::Qsau {
                eps: get("eps").ok_or_else(|| QuadError::param("eps", "svr needs eps"))?,
            },
            other => Family::from_name(other, get)?,
        };
        family.validate()?;
        match family {
            Family::Quantile { alpha } => Ok(Model::Quantile { alpha }),
            Family::ExpectilePl { k } => Ok(Model::ExpectilePl { k }),
            Family::ExpectileMse { q } => Ok(Model::ExpectileMse { q }),
            Family::Qsau { eps } => Ok(Model::Svr { eps }),
            Family::MeanPl => Ok(Model::MeanPl),
            Family::BiasedMean { x } => Ok(Model::BiasedMean { x }),
            other => Err(QuadError::Invalid(format!("{} is not a named regression model", other.name()))),
        }
    }
}

pub fn fit_named(model: Model, data: &Dataset) -> Result<FitResult> {
    fit_linear(&model.family().error_fn()?, data)
}

pub fn fit_named_with(model: Model, data: &Dataset, budget: &Budget) -> Result<FitResult> {
    fit_linear_with(&model.family().error_fn()?, data, budget)
}

#[derive(Clone, Debug, Serialize)]
pub struct SvcResult {
    pub direction: Vec<f64>,
    pub intercept: f64,
    pub objective: f64,
}

/// `min CVaR_alpha(-y (w . x + w0))` over `|w|_2 <= 1` via the regret formula
/// in `(w, w0, C)`. Targets must be `+1` or `-1`.
pub fn nu_svc(alpha: f64, data: &Dataset) -> Result<SvcResult> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(QuadError::param("alpha", format!("must lie in [0, 1), got {alpha}")));
    }
    if data.target.iter().any(|y| *y != 1.0 && *y != -1.0) {
        return Err(QuadError::Invalid("classification targets must be +1 or -1".into()));
    }
    let m = data.regressors();
    let obj = |v: &[f64]| {
        let (w, w0, c) = (&v[..m], v[m], v[m + 1]);
        let mut s = 0.0;
        for i in 0..data.rows() {
            let score: f64 = w.iter().zip(&data.features[i]).map(|(a, b)| a * b).sum::<f64>() + w0;
            s += data.weights[i] * (-data.target[i] * score - c).max(0.0);
        }
        c + s / (1.0 - alpha)
    };
    let project = |v: &mut [f64]| {
        let n: f64 = v[..m].iter().map(|a| a * a).sum::<f64>().sqrt();
        if n > 1.0 {
            v[..m].iter_mut().for_each(|a| *a /= n);
        }
    };
    let scale = data.features.iter().flatten().fold(1.0f64, |a, v| a.max(v.abs()));
    let opts = ConvexOptions { scale, ..Default::default() };
    let res = minimize_convex(obj, project, &vec![0.0; m + 2], &opts);
    if !res.value.is_finite() {
        return Err(QuadError::NonConvergence { iterations: res.iterations, reason: "objective not finite".into() });
    }
    Ok(SvcResult { direction: res.x[..m].to_vec(), intercept: res.x[m], objective: res.value })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_data() -> Dataset {
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0];
        Dataset::new(xs.iter().map(|x| vec![*x]).collect(), xs.iter().map(|x| 2.0 * x + 1.0).collect(), None).unwrap()
    }

    #[test]
    fn perfect_line_for_every_named_model() {
        for model in [
            Model::Quantile { alpha: 0.3 },
            Model::ExpectilePl { k: 0.5 },
            Model::ExpectileMse { q: 0.7 },
            Model::MeanPl,
        ] {
            let fit = fit_named(model, &line_data()).unwrap();
            assert!(fit.objective.abs() < 1e-9, "{model:?}: {}", fit.objective);
            assert!((fit.coefficients[0] - 2.0).abs() < 1e-6 && (fit.intercept - 1.0).abs() < 1e-6, "{model:?}");
        }
    }

    #[test]
    fn intercept_only_statistics() {
        let d = Dataset::intercept_only(vec![1.0, 2.0, 3.0], None).unwrap();
        let fit = fit_named(Model::Quantile { alpha: 0.5 }, &d).unwrap();
        assert!((fit.intercept - 2.0).abs() < 1e-12);
        let d = Dataset::intercept_only(vec![0.0, 1.0], None).unwrap();
        let fit = fit_named(Model::ExpectileMse { q: 0.75 }, &d).unwrap();
        assert!((fit.intercept - 0.75).abs() < 1e-12, "{}", fit.intercept);
        let fit = fit_named(Model::ExpectilePl { k: 0.5 }, &d).unwrap();
        assert!((fit.intercept - 0.75).abs() < 1e-12);
        let fit = fit_named(Model::Svr { eps: 10.0 }, &d).unwrap();
        assert!(fit.objective.abs() < 1e-12 && fit.non_unique);
    }

    #[test]
    fn equivalence_and_tracking() {
        let d = Dataset::new(
            vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0], vec![1.5]],
            vec![0.3, 1.7, 1.2, 3.9, 2.0],
            None,
        )
        .unwrap();
        let fam = Family::Quantile { alpha: 0.5 };
        let rep = regression_equivalence_check(&fam.quartet().unwrap(), &fam.error_fn().unwrap(), &d).unwrap();
        assert!(rep.gap < 1e-9 && rep.statistic_contains_zero, "{rep:?}");
        let fit = fit_named(Model::Quantile { alpha: 0.5 }, &d).unwrap();
        assert!(track_statistic(&fit, &fam.quartet().unwrap()));
        let mut bad = fit.clone();
        bad.residual = d.residual_rv(fit.intercept + 0.5, &fit.coefficients);
        assert!(!track_statistic(&bad, &fam.quartet().unwrap()));
    }

    #[test]
    fn l2_error_is_least_squares() {
        let d = Dataset::new(
            vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]],
            vec![0.1, 0.9, 2.3, 2.8],
            None,
        )
        .unwrap();
        let fam = Family::StandardMean { lambda: 1.0 };
        let fit = fit_linear(&fam.error_fn().unwrap(), &d).unwrap();
        let ls = least_squares(&d);
        assert!((fit.intercept - ls[0]).abs() < 1e-6 && (fit.coefficients[0] - ls[1]).abs() < 1e-6);
        let rep = regression_equivalence_check(&fam.quartet().unwrap(), &fam.error_fn().unwrap(), &d).unwrap();
        assert!(rep.gap < 1e-6, "{rep:?}");
    }

    #[test]
    fn svc_separable_and_not() {
        let d = Dataset::new(vec![vec![-1.0], vec![1.0]], vec![-1.0, 1.0], None).unwrap();
        assert!(nu_svc(0.5, &d).unwrap().objective < 0.0);
        let d = Dataset::new(vec![vec![1.0], vec![1.0]], vec![-1.0, 1.0], None).unwrap();
        assert!(nu_svc(0.5, &d).unwrap().objective >= -1e-9);
    }
}
