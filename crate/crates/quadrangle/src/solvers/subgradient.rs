//! Multivariate convex minimization: projected subgradient steps followed by
//! a gradient-sampling refinement.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub const DEFAULT_SUBGRADIENT_ITERS: usize = 50_000;

#[derive(Clone, Debug)]
pub struct SubgradientOptions {
    pub max_iter: usize,
    /// Step coefficient `a` in the schedule `a / sqrt(k)`.
    pub step: f64,
    pub tol: f64,
    /// Known optimal value, if any; enables the gap test.
    pub target: Option<f64>,
}

impl Default for SubgradientOptions {
    fn default() -> Self {
        SubgradientOptions { max_iter: DEFAULT_SUBGRADIENT_ITERS, step: 1.0, tol: 1e-8, target: None }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MinimizeResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Best value minus the target, when a target was supplied.
    pub gap: Option<f64>,
}

/// Projected subgradient method with diminishing steps `a / sqrt(k)` along
/// normalized subgradients, keeping the best iterate.
pub fn minimize_subgradient<F, G, P>(f: F, subgrad: G, project: P, x0: &[f64], opts: &SubgradientOptions) -> MinimizeResult
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
    P: Fn(&mut [f64]),
{
    let mut x = x0.to_vec();
    project(&mut x);
    let mut best_x = x.clone();
    let mut best = f(&x);
    let mut best_at_half = best;
    let mut k_done = 0;
    for k in 1..=opts.max_iter {
        k_done = k;
        let g = subgrad(&x);
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            break;
        }
        let t = opts.step / (k as f64).sqrt() / norm;
        for (xi, gi) in x.iter_mut().zip(&g) {
            *xi -= t * gi;
        }
        project(&mut x);
        let v = f(&x);
        if v < best {
            best = v;
            best_x.clone_from(&x);
        }
        if k == opts.max_iter / 2 {
            best_at_half = best;
        }
        if let Some(target) = opts.target {
            if best - target <= opts.tol {
                break;
            }
        }
    }
    let gap = opts.target.map(|t| best - t);
    let converged = match gap {
        Some(g) => g <= opts.tol,
        None => best_at_half - best <= opts.tol * (1.0 + best.abs()),
    };
    MinimizeResult { x: best_x, value: best, iterations: k_done, converged, gap }
}

/// Central-difference gradient.
pub fn numeric_gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], h: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    let mut g = vec![0.0; x.len()];
    for j in 0..x.len() {
        let hj = h * (1.0 + x[j].abs());
        y[j] = x[j] + hj;
        let fp = f(&y);
        y[j] = x[j] - hj;
        let fm = f(&y);
        y[j] = x[j];
        let d = (fp - fm) / (2.0 * hj);
        g[j] = if d.is_finite() { d } else if fp.is_finite() { -1e12 } else { 1e12 };
    }
    g
}

#[derive(Clone, Debug)]
pub struct ConvexOptions {
    /// Typical distance to the optimum; sets initial steps and sampling radii.
    pub scale: f64,
    pub subgradient_iters: usize,
    pub sampling_iters: usize,
    pub seed: u64,
}

impl Default for ConvexOptions {
    fn default() -> Self {
        ConvexOptions { scale: 1.0, subgradient_iters: 3_000, sampling_iters: 3_000, seed: 0 }
    }
}

/// Iteration budget and seed for the multivariate solvers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Budget {
    /// Iterations for each of the subgradient and sampling phases.
    pub iters: usize,
    pub seed: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { iters: 3_000, seed: 0 }
    }
}

impl ConvexOptions {
    pub fn from_budget(scale: f64, budget: &Budget) -> Self {
        ConvexOptions { scale, subgradient_iters: budget.iters, sampling_iters: budget.iters, seed: budget.seed }
    }
}

/// Minimum-norm point of the convex hull of `gs`, by Frank-Wolfe with exact
/// line search on the simplex of weights.
fn min_norm_hull(gs: &[Vec<f64>]) -> Vec<f64> {
    let m = gs.len();
    let n = gs[0].len();
    let mut w = vec![1.0 / m as f64; m];
    let combo = |w: &[f64]| {
        let mut v = vec![0.0; n];
        for (wk, g) in w.iter().zip(gs) {
            for j in 0..n {
                v[j] += wk * g[j];
            }
        }
        v
    };
    let mut v = combo(&w);
    for _ in 0..500 {
        // vertex minimizing <v, g_k>
        let (k, _) = gs
            .iter()
            .enumerate()
            .map(|(k, g)| (k, g.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>()))
            .fold((0, f64::INFINITY), |acc, it| if it.1 < acc.1 { it } else { acc });
        let d: Vec<f64> = gs[k].iter().zip(&v).map(|(a, b)| a - b).collect();
        let dd: f64 = d.iter().map(|x| x * x).sum();
        if dd <= 1e-30 {
            break;
        }
        let gamma = (-v.iter().zip(&d).map(|(a, b)| a * b).sum::<f64>() / dd).clamp(0.0, 1.0);
        if gamma <= 1e-14 {
            break;
        }
        for (i, wi) in w.iter_mut().enumerate() {
            *wi *= 1.0 - gamma;
            if i == k {
                *wi += gamma;
            }
        }
        v = combo(&w);
    }
    v
}

/// General convex minimizer for low-dimensional problems with numerically
/// estimated subgradients. `project` maps a point onto the feasible set.
pub fn minimize_convex<F, P>(f: F, project: P, x0: &[f64], opts: &ConvexOptions) -> MinimizeResult
where
    F: Fn(&[f64]) -> f64,
    P: Fn(&mut [f64]),
{
    let n = x0.len();
    let fv = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut x = x0.to_vec();
    project(&mut x);
    let mut best_x = x.clone();
    let mut best = fv(&x);
    if n == 0 {
        return MinimizeResult { x, value: best, iterations: 0, converged: true, gap: None };
    }
    let scale = opts.scale.max(1e-12);
    let mut iterations = 0;

    // subgradient rounds with shrinking step coefficient
    let rounds = 6;
    let per_round = (opts.subgradient_iters / rounds).max(1);
    let mut a = scale;
    for _ in 0..rounds {
        let mut y = best_x.clone();
        for k in 1..=per_round {
            let g = numeric_gradient(&fv, &y, 1e-7);
            let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 || !norm.is_finite() {
                break;
            }
            let t = a / (k as f64).sqrt() / norm;
            for (yi, gi) in y.iter_mut().zip(&g) {
                *yi -= t * gi;
            }
            project(&mut y);
            let v = fv(&y);
            if v < best {
                best = v;
                best_x.clone_from(&y);
            }
            iterations += 1;
        }
        a *= 0.25;
    }

    // gradient sampling
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut radius = 0.1 * scale;
    let r_min = 1e-11 * scale;
    let m = (n + 1).max(2);
    x = best_x.clone();
    let mut fx = best;
    let mut gs_iter = 0;
    while radius > r_min && gs_iter < opts.sampling_iters {
        gs_iter += 1;
        iterations += 1;
        let h = (radius * 1e-2).min(1e-7);
        let mut grads = Vec::with_capacity(m + 1);
        grads.push(numeric_gradient(&fv, &x, h));
        for _ in 0..m {
            let mut y: Vec<f64> = x.iter().map(|&xi| xi + radius * (2.0 * rng.gen::<f64>() - 1.0)).collect();
            project(&mut y);
            grads.push(numeric_gradient(&fv, &y, h));
        }
        let g = min_norm_hull(&grads);
        let gn2: f64 = g.iter().map(|v| v * v).sum();
        if gn2.sqrt() <= 1e-13 * (1.0 + fx.abs()) {
            radius *= 0.1;
            continue;
        }
        let mut t = (10.0 * scale / gn2.sqrt()).min(1e6);
        let mut moved = false;
        for _ in 0..80 {
            let mut y: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - t * gi).collect();
            project(&mut y);
            let dec: f64 = g.iter().zip(x.iter().zip(&y)).map(|(gi, (xi, yi))| gi * (xi - yi)).sum();
            if dec > 0.0 {
                let v = fv(&y);
                if v < fx - 1e-4 * dec {
                    x = y;
                    fx = v;
                    moved = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !moved {
            radius *= 0.1;
        }
    }
    if fx < best {
        best = fx;
        best_x = x;
    }
    MinimizeResult { x: best_x, value: best, iterations, converged: radius <= r_min, gap: None }
}

/// Euclidean projection onto the probability simplex.
pub fn project_simplex(v: &mut [f64]) {
    let n = v.len();
    if n == 0 {
        return;
    }
    let mut u: Vec<f64> = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut css = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        css += ui;
        let t = (css - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    for x in v.iter_mut() {
        *x = (*x - theta).max(0.0);
    }
}

/// Projection onto `{w >= 0, sum w = 1, mu . w = target}` by Dykstra's
/// alternating projections between the simplex and the hyperplane.
pub fn project_simplex_with_mean(v: &mut [f64], mu: &[f64], target: f64) {
    let n = v.len();
    let mm = mu.iter().sum::<f64>() / n as f64;
    let c: Vec<f64> = mu.iter().map(|m| m - mm).collect();
    let cc: f64 = c.iter().map(|x| x * x).sum();
    // hyperplane {sum w = 1, mu . w = target}: project onto the affine set
    let project_affine = |w: &mut [f64]| {
        let s: f64 = w.iter().sum();
        for wi in w.iter_mut() {
            *wi += (1.0 - s) / n as f64;
        }
        if cc > 0.0 {
            let r: f64 = mu.iter().zip(w.iter()).map(|(m, x)| m * x).sum::<f64>() - target;
            for (wi, ci) in w.iter_mut().zip(&c) {
                *wi -= r * ci / cc;
            }
        }
    };
    let mut x = v.to_vec();
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    for _ in 0..5_000 {
        let mut y: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a + b).collect();
        project_affine(&mut y);
        p = x.iter().zip(&p).zip(&y).map(|((xi, pi), yi)| xi + pi - yi).collect();
        let mut z: Vec<f64> = y.iter().zip(&q).map(|(a, b)| a + b).collect();
        project_simplex(&mut z);
        q = y.iter().zip(&q).zip(&z).map(|((yi, qi), zi)| yi + qi - zi).collect();
        let change: f64 = z.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        x = z;
        if change < 1e-15 {
            break;
        }
    }
    v.copy_from_slice(&x);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subgradient_on_l1() {
        let f = |x: &[f64]| (x[0] - 1.0).abs() + (x[1] + 2.0).abs();
        let g = |x: &[f64]| vec![(x[0] - 1.0).signum(), (x[1] + 2.0).signum()];
        let opts = SubgradientOptions { target: Some(0.0), tol: 1e-3, ..Default::default() };
        let r = minimize_subgradient(f, g, |_: &mut [f64]| {}, &[5.0, 5.0], &opts);
        assert!(r.converged, "{r:?}");
    }

    #[test]
    fn convex_minimizer_nonsmooth() {
        // max of affine pieces with a kink valley not aligned to the axes
        let f = |x: &[f64]| (x[0] + x[1] - 1.0).abs() * 3.0 + (x[0] - x[1]).abs() + 0.1 * x[0] * x[0];
        let r = minimize_convex(f, |_: &mut [f64]| {}, &[4.0, -3.0], &ConvexOptions::default());
        // optimum at x0 = x1 = 0.5, value 0.025
        assert!((r.value - 0.025).abs() < 1e-7, "{r:?}");
    }

    #[test]
    fn convex_minimizer_smooth_ill_conditioned() {
        let f = |x: &[f64]| 100.0 * (x[0] - 1.0).powi(2) + 0.01 * (x[1] - 2.0).powi(2);
        let r = minimize_convex(f, |_: &mut [f64]| {}, &[0.0, 0.0], &ConvexOptions { scale: 2.0, ..Default::default() });
        assert!(r.value < 1e-9, "{r:?}");
    }

    #[test]
    fn simplex_projection() {
        let mut v = vec![0.5, 0.8, -0.2];
        project_simplex(&mut v);
        assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((v[0] - 0.35).abs() < 1e-12 && (v[1] - 0.65).abs() < 1e-12 && v[2] == 0.0);
        let mu = [0.01, 0.03, 0.05];
        let mut w = vec![1.0, 0.0, 0.0];
        project_simplex_with_mean(&mut w, &mu, 0.03);
        let m: f64 = w.iter().zip(&mu).map(|(a, b)| a * b).sum();
        assert!((m - 0.03).abs() < 1e-10 && w.iter().all(|&x| x >= 0.0));
    }
}
