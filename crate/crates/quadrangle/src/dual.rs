//! Conjugates and risk envelopes on the atom space. Densities `Q` pair with
//! `X` through `E[Q X] = sum_i p_i Q_i X_i`.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::error::{QuadError, Result};
use crate::measures::Family;
use crate::quartet::Functional;
use crate::rv::DiscreteRv;
use crate::sampling::{random_probs, random_values, rng};
use crate::solvers::{minimize_convex, numeric_gradient, ConvexOptions, LinearProgram, LpStatus, Relation};

/// Slack used when testing membership and strict separation.
pub const SEPARATION_MARGIN: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DualKind {
    Error,
    Regret,
    Deviation,
    Risk,
}

impl DualKind {
    /// The density every envelope of this kind must contain.
    pub fn center(self) -> f64 {
        match self {
            DualKind::Error | DualKind::Deviation => 0.0,
            DualKind::Regret | DualKind::Risk => 1.0,
        }
    }

    /// Required value of `E[Q]`, if the kind lives on a hyperplane.
    pub fn hyperplane(self) -> Option<f64> {
        match self {
            DualKind::Deviation => Some(0.0),
            DualKind::Risk => Some(1.0),
            _ => None,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "error" => Ok(DualKind::Error),
            "regret" => Ok(DualKind::Regret),
            "deviation" => Ok(DualKind::Deviation),
            "risk" => Ok(DualKind::Risk),
            other => Err(QuadError::Invalid(format!("unknown functional kind {other}"))),
        }
    }
}

pub type Distortion = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Envelope shape before the offset is applied.
#[derive(Clone)]
pub enum Shape {
    /// `lo <= Q <= hi`, optionally with `E[Q]` fixed.
    Box { lo: f64, hi: f64, mean: Option<f64> },
    /// `Q >= 0`, `E[Q] = 1` and `sum_{i in S} p_i Q_i <= g(P(S))` for every
    /// atom subset `S`.
    Distortion(Distortion),
    /// `Q >= 0`, `E[Q] = 1`, `Q_i <= ratio Q_j`.
    Ratio(f64),
    /// `{1 + Z - E[Z] : 0 <= Z <= 1}`.
    MeanAbsolute,
    /// `E[(Q - center)^2] <= radius^2`, optionally with `E[Q]` fixed.
    Ball { center: f64, radius: f64, mean: Option<f64> },
    Singleton(f64),
    /// Known only through a positively homogeneous primal functional.
    Oracle(Functional),
}

/// Dual set of a positively homogeneous functional: `{Q - offset : Q in shape}`.
#[derive(Clone)]
pub struct Envelope {
    pub label: String,
    pub kind: DualKind,
    pub shape: Shape,
    pub offset: f64,
}

impl fmt::Debug for Envelope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Envelope").field("label", &self.label).field("kind", &self.kind).finish()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SupportValue {
    pub value: f64,
    /// A maximizing density, when the representation yields one.
    pub density: Option<Vec<f64>>,
    pub method: &'static str,
}

fn dot(x: &DiscreteRv, q: &[f64]) -> f64 {
    x.atoms().zip(q).map(|((v, p), qi)| p * v * qi).sum()
}

fn mean(q: &[f64], p: &[f64]) -> f64 {
    q.iter().zip(p).map(|(a, b)| a * b).sum()
}

impl Envelope {
    pub fn new(label: impl Into<String>, kind: DualKind, shape: Shape) -> Self {
        Envelope { label: label.into(), kind, shape, offset: 0.0 }
    }

    fn shifted(mut self, kind: DualKind) -> Self {
        self.offset += 1.0;
        self.kind = kind;
        self
    }

    pub fn is_polyhedral(&self) -> bool {
        matches!(
            self.shape,
            Shape::Box { .. } | Shape::Distortion(_) | Shape::Ratio(_) | Shape::MeanAbsolute | Shape::Singleton(_)
        )
    }

    /// LP over `[Q, aux]` describing the shape on the atom space of `probs`.
    fn program(&self, probs: &[f64]) -> Option<LinearProgram> {
        let n = probs.len();
        let mean_row = |lp: &mut LinearProgram, m: f64| {
            let terms: Vec<(usize, f64)> = probs.iter().copied().enumerate().collect();
            lp.constraint_sparse(&terms, Relation::Eq, m);
        };
        let lp = match &self.shape {
            Shape::Box { lo, hi, mean } => {
                let mut lp = LinearProgram::new(n);
                for j in 0..n {
                    lp.bounds(j, *lo, *hi);
                }
                if let Some(m) = mean {
                    mean_row(&mut lp, *m);
                }
                lp
            }
            Shape::Distortion(g) => {
                let mut lp = LinearProgram::new(n);
                mean_row(&mut lp, 1.0);
                for mask in 1u32..(1u32 << n) - 1 {
                    let terms: Vec<(usize, f64)> =
                        (0..n).filter(|i| mask & (1 << i) != 0).map(|i| (i, probs[i])).collect();
                    let ps: f64 = terms.iter().map(|t| t.1).sum();
                    lp.constraint_sparse(&terms, Relation::Le, g(ps));
                }
                lp
            }
            Shape::Ratio(r) => {
                let mut lp = LinearProgram::new(n);
                mean_row(&mut lp, 1.0);
                for i in 0..n {
                    for j in 0..n {
                        if i != j {
                            lp.constraint_sparse(&[(i, 1.0), (j, -r)], Relation::Le, 0.0);
                        }
                    }
                }
                lp
            }
            Shape::MeanAbsolute => {
                let mut lp = LinearProgram::new(2 * n);
                for i in 0..n {
                    lp.free(i);
                    lp.bounds(n + i, 0.0, 1.0);
                    let mut terms = vec![(i, 1.0), (n + i, -1.0)];
                    terms.extend(probs.iter().enumerate().map(|(j, p)| (n + j, *p)));
                    lp.constraint_sparse(&terms, Relation::Eq, 1.0);
                }
                lp
            }
            Shape::Singleton(c) => {
                let mut lp = LinearProgram::new(n);
                for j in 0..n {
                    lp.bounds(j, *c, *c);
                }
                lp
            }
            Shape::Ball { .. } | Shape::Oracle(_) => return None,
        };
        Some(lp)
    }

    /// `sup_{Q in envelope} E[Q X]` with a maximizer.
    pub fn support(&self, x: &DiscreteRv) -> Result<SupportValue> {
        let probs = x.probs();
        let n = probs.len();
        let off = self.offset;
        if let Some(mut lp) = self.program(probs) {
            let mut c = vec![0.0; lp.num_vars()];
            for (i, (v, p)) in x.atoms().enumerate() {
                c[i] = p * v;
            }
            lp.maximize(c);
            let sol = lp.solve();
            if sol.status != LpStatus::Optimal {
                return Err(QuadError::Infeasible(format!("envelope LP for {}: {:?}", self.label, sol.status)));
            }
            let q: Vec<f64> = sol.x[..n].iter().map(|v| v - off).collect();
            return Ok(SupportValue { value: dot(x, &q), density: Some(q), method: "lp" });
        }
        match &self.shape {
            Shape::Ball { center, radius, mean } => {
                let (dir, norm) = match mean {
                    Some(_) => {
                        let m = x.expectation();
                        (x.values().iter().map(|v| v - m).collect::<Vec<_>>(), x.std_dev())
                    }
                    None => (x.values().to_vec(), x.l2_norm()),
                };
                let q: Vec<f64> = dir
                    .iter()
                    .map(|d| center + if norm > 0.0 { radius * d / norm } else { 0.0 } - off)
                    .collect();
                Ok(SupportValue { value: dot(x, &q), density: Some(q), method: "closed_form" })
            }
            Shape::Oracle(f) => {
                let q = oracle_density(f, x);
                let value = f(x) - off * x.expectation();
                Ok(SupportValue { value, density: Some(q.iter().map(|v| v - off).collect()), method: "primal" })
            }
            _ => unreachable!(),
        }
    }

    /// Membership of a density on the atom space of `probs`.
    pub fn contains(&self, q: &[f64], probs: &[f64], tol: f64) -> bool {
        let q: Vec<f64> = q.iter().map(|v| v + self.offset).collect();
        let n = q.len();
        match &self.shape {
            Shape::Box { lo, hi, mean: m } => {
                q.iter().all(|v| *v >= lo - tol && *v <= hi + tol)
                    && m.is_none_or(|m| (mean(&q, probs) - m).abs() <= tol)
            }
            Shape::Distortion(g) => {
                if q.iter().any(|v| *v < -tol) || (mean(&q, probs) - 1.0).abs() > tol {
                    return false;
                }
                (1u32..(1u32 << n) - 1).all(|mask| {
                    let (s, ps) = (0..n)
                        .filter(|i| mask & (1 << i) != 0)
                        .fold((0.0, 0.0), |acc, i| (acc.0 + probs[i] * q[i], acc.1 + probs[i]));
                    s <= g(ps) + tol
                })
            }
            Shape::Ratio(r) => {
                let lo = q.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = q.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                lo >= -tol && hi <= r * lo + tol && (mean(&q, probs) - 1.0).abs() <= tol
            }
            Shape::MeanAbsolute => {
                // Z = Q - lo works whenever E[Q] = 1 and the range of Q is at most 1
                let lo = q.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = q.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                (mean(&q, probs) - 1.0).abs() <= tol && hi - lo <= 1.0 + tol
            }
            Shape::Ball { center, radius, mean: m } => {
                let d: f64 = q.iter().zip(probs).map(|(v, p)| p * (v - center).powi(2)).sum();
                d.sqrt() <= radius + tol && m.is_none_or(|m| (mean(&q, probs) - m).abs() <= tol)
            }
            Shape::Singleton(c) => q.iter().all(|v| (v - c).abs() <= tol),
            Shape::Oracle(f) => {
                // the oracle functional is the shape's own support function
                let c = conjugate_eval(f, &q, probs, 10.0, 0);
                c.value <= 1e-8 && !c.unbounded
            }
        }
    }

    /// Envelope points: maximizers for random directions plus the center.
    pub fn sample_points(&self, probs: &[f64], count: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut r = rng(seed);
        let n = probs.len();
        let mut out = vec![vec![self.kind.center(); n]];
        for _ in 0..count {
            // sorted distinct values keep the atom order of `probs`
            let mut xs = random_values(&mut r, n, -5.0, 5.0);
            xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let x = DiscreteRv::from_scenarios(&xs, probs);
            if x.len() != n {
                continue;
            }
            if let Ok(SupportValue { density: Some(q), .. }) = self.support(&x) {
                out.push(q);
            }
        }
        out
    }
}

/// Gradient of `f` at `x` read as a density (a subgradient of a positively
/// homogeneous functional lies in its envelope).
fn oracle_density(f: &Functional, x: &DiscreteRv) -> Vec<f64> {
    let probs = x.probs().to_vec();
    let g = |v: &[f64]| f(&DiscreteRv::from_scenarios(v, &probs));
    let scale = 1.0 + x.values().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let grad = numeric_gradient(&g, x.values(), 1e-7 * scale);
    grad.iter().zip(&probs).map(|(gi, p)| gi / p).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConjugateValue {
    /// Best value found, a lower bound on the conjugate.
    pub value: f64,
    pub unbounded: bool,
}

/// `F*(Q) = sup_X {E[X Q] - F(X)}` over `X` in `[-radius, radius]^n`. Growth
/// with the box signals `+inf`.
pub fn conjugate_eval(f: &Functional, q: &[f64], probs: &[f64], radius: f64, seed: u64) -> ConjugateValue {
    let solve = |rad: f64| {
        let obj = |x: &[f64]| {
            let lin: f64 = x.iter().zip(q).zip(probs).map(|((a, b), c)| a * b * c).sum();
            f(&DiscreteRv::from_scenarios(x, probs)) - lin
        };
        let project = move |x: &mut [f64]| x.iter_mut().for_each(|v| *v = v.clamp(-rad, rad));
        let opts = ConvexOptions { scale: rad / 4.0, seed, ..Default::default() };
        -minimize_convex(obj, project, &vec![0.0; q.len()], &opts).value
    };
    let v1 = solve(radius);
    if v1 <= 1e-9 {
        return ConjugateValue { value: v1.max(0.0).min(v1), unbounded: false };
    }
    let v2 = solve(4.0 * radius);
    let unbounded = v2 > 2.0 * v1 + 1e-9;
    ConjugateValue { value: if unbounded { f64::INFINITY } else { v2 }, unbounded }
}

/// Distortion of the second-order superquantile.
fn cvar2_distortion(alpha: f64) -> Distortion {
    Arc::new(move |s: f64| {
        let t = 1.0 - alpha;
        if s >= t {
            1.0
        } else if s <= 0.0 {
            0.0
        } else {
            s / t * (1.0 + (t / s).ln())
        }
    })
}

fn qsa_distortion(alpha: f64) -> Distortion {
    Arc::new(move |s: f64| 0.5 * ((2.0 * s).min(1.0 + alpha) + (2.0 * s).min(1.0 - alpha)))
}

/// Envelope of a catalog member. Only positively homogeneous members have one.
pub fn envelope_extract(family: &Family, kind: DualKind) -> Result<Envelope> {
    let q = family.quartet()?;
    if !q.flags.positively_homogeneous {
        return Err(QuadError::Axiom {
            kind: "envelope",
            reason: format!("{} is not positively homogeneous", family.name()),
        });
    }
    let label = format!("{}:{:?}", q.label, kind).to_lowercase();
    let base_kind = match kind {
        DualKind::Risk | DualKind::Deviation => DualKind::Risk,
        DualKind::Regret | DualKind::Error => DualKind::Regret,
    };
    let shape = match (*family, base_kind) {
        (Family::StandardMean { lambda }, DualKind::Risk) => Shape::Ball { center: 1.0, radius: lambda, mean: Some(1.0) },
        (Family::StandardMean { lambda }, _) => Shape::Ball { center: 1.0, radius: lambda, mean: None },
        (Family::Quantile { alpha }, DualKind::Risk) => Shape::Box { lo: 0.0, hi: 1.0 / (1.0 - alpha), mean: Some(1.0) },
        (Family::Quantile { alpha }, _) => Shape::Box { lo: 0.0, hi: 1.0 / (1.0 - alpha), mean: None },
        (Family::Cvar2 { alpha }, DualKind::Risk) => Shape::Distortion(cvar2_distortion(alpha)),
        (Family::Qsa { alpha }, DualKind::Risk) => Shape::Distortion(qsa_distortion(alpha)),
        (Family::ExpectilePl { k }, DualKind::Risk) => Shape::Ratio((1.0 + k) / k),
        (Family::MeanPl, DualKind::Risk) | (Family::BiasedMean { .. }, DualKind::Risk) => Shape::MeanAbsolute,
        (_, DualKind::Risk) => Shape::Oracle(q.risk_fn()),
        _ => Shape::Oracle(q.regret_fn()),
    };
    let env = Envelope::new(label, base_kind, shape);
    Ok(match kind {
        DualKind::Deviation => env.shifted(DualKind::Deviation),
        DualKind::Error => env.shifted(DualKind::Error),
        _ => env,
    })
}

/// CVaR envelope `{0 <= Q <= 1/(1-alpha), E[Q] = 1}`, exposed for direct use.
pub fn cvar_envelope(alpha: f64) -> Result<Envelope> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(QuadError::param("alpha", format!("must lie in [0, 1), got {alpha}")));
    }
    Ok(Envelope::new(
        format!("cvar({alpha}):risk"),
        DualKind::Risk,
        Shape::Box { lo: 0.0, hi: 1.0 / (1.0 - alpha), mean: Some(1.0) },
    ))
}

#[derive(Clone, Debug, Serialize)]
pub struct DualClause {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct DualReport {
    pub label: String,
    pub kind: DualKind,
    pub clauses: Vec<DualClause>,
}

impl DualReport {
    pub fn all_pass(&self) -> bool {
        self.clauses.iter().all(|c| c.pass)
    }
}

/// Clause checks of the dual characterization for `kind`, sampled over
/// random atom spaces with `atoms` atoms.
pub fn dual_axiom_check(env: &Envelope, kind: DualKind, atoms: usize, samples: usize, seed: u64) -> DualReport {
    let mut r = rng(seed);
    let n = atoms.max(2);
    let tag = match kind {
        DualKind::Error => "E",
        DualKind::Regret => "V",
        DualKind::Deviation => "D",
        DualKind::Risk => "R",
    };
    let mut clauses = Vec::new();
    let probs = random_probs(&mut r, n);
    let center = vec![kind.center(); n];
    let has_center = env.contains(&center, &probs, 1e-9);
    clauses.push(DualClause {
        name: format!("{tag}: center {} in envelope", kind.center()),
        pass: has_center,
        detail: format!("checked on {n} atoms"),
    });
    if let Some(h) = kind.hyperplane() {
        let pts = env.sample_points(&probs, samples, seed + 1);
        let worst = pts.iter().map(|q| (mean(q, &probs) - h).abs()).fold(0.0, f64::max);
        clauses.push(DualClause {
            name: format!("{tag}: E[Q] = {h} on the envelope"),
            pass: worst <= 1e-9,
            detail: format!("max |E[Q] - {h}| = {worst:.3e} over {} points", pts.len()),
        });
    }
    let mut failure = None;
    for _ in 0..samples {
        let probs = random_probs(&mut r, n);
        let mut xs = random_values(&mut r, n, -5.0, 5.0);
        if r.gen_bool(0.2) {
            // sparse directions
            let k = r.gen_range(0..n);
            xs.iter_mut().enumerate().filter(|(i, _)| *i != k).for_each(|(_, v)| *v = 0.0);
        }
        let x = DiscreteRv::from_scenarios(&xs, &probs);
        let skip = match kind {
            DualKind::Error | DualKind::Regret => x.values().iter().all(|v| *v == 0.0),
            DualKind::Deviation | DualKind::Risk => x.is_constant(),
        };
        if skip {
            continue;
        }
        let threshold = match kind {
            DualKind::Error | DualKind::Deviation => 0.0,
            DualKind::Regret | DualKind::Risk => x.expectation(),
        };
        match env.support(&x) {
            Ok(s) if s.value > threshold + SEPARATION_MARGIN => {}
            Ok(s) => {
                failure = Some(format!("sup E[QX] = {} vs threshold {} at X = {}", s.value, threshold, x));
                break;
            }
            Err(e) => {
                failure = Some(e.to_string());
                break;
            }
        }
    }
    let sep_name = match kind {
        DualKind::Error => "E: E[XQ] > 0 for nonzero X",
        DualKind::Regret => "V: E[XQ] > E[X] for nonzero X",
        DualKind::Deviation => "D: E[XQ] > 0 for nonconstant X",
        DualKind::Risk => "R: E[XQ] > E[X] for nonconstant X",
    };
    clauses.push(DualClause {
        name: sep_name.into(),
        pass: failure.is_none(),
        detail: failure.unwrap_or_else(|| format!("{samples} sampled X")),
    });
    DualReport { label: env.label.clone(), kind, clauses }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quartet::functional;

    #[test]
    fn cvar_envelope_vertex() {
        let env = cvar_envelope(0.5).unwrap();
        let x = DiscreteRv::uniform(&[-1.0, 1.0]).unwrap();
        let s = env.support(&x).unwrap();
        assert!((s.value - 1.0).abs() < 1e-12);
        let q = s.density.unwrap();
        assert!((q[0] - 0.0).abs() < 1e-12 && (q[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn catalog_supports_match_primal() {
        let xs = crate::sampling::random_batch(7, 30, 5, -3.0, 3.0);
        for fam in Family::defaults() {
            let Ok(env) = envelope_extract(&fam, DualKind::Risk) else { continue };
            let q = fam.quartet().unwrap();
            for x in &xs {
                let s = env.support(x).unwrap();
                assert!((s.value - q.risk(x)).abs() < 1e-7, "{}: {} vs {}", fam.name(), s.value, q.risk(x));
            }
        }
    }

    #[test]
    fn conjugate_of_second_moment() {
        let f = functional(|x: &DiscreteRv| x.expect(|v| v * v));
        let c = conjugate_eval(&f, &[1.0, 1.0], &[0.5, 0.5], 10.0, 0);
        assert!((c.value - 0.25).abs() < 1e-6, "{}", c.value);
        let lin = functional(|x: &DiscreteRv| x.expectation());
        assert!(conjugate_eval(&lin, &[1.0, 1.0], &[0.5, 0.5], 10.0, 0).value.abs() < 1e-8);
        assert!(conjugate_eval(&lin, &[0.5, 1.5], &[0.5, 0.5], 10.0, 0).unbounded);
    }

    #[test]
    fn clause_reports() {
        let env = cvar_envelope(0.3).unwrap();
        let rep = dual_axiom_check(&env, DualKind::Risk, 4, 30, 0);
        assert!(rep.all_pass(), "{rep:?}");
        let dev = envelope_extract(&Family::StandardMean { lambda: 1.0 }, DualKind::Deviation).unwrap();
        assert!(dual_axiom_check(&dev, DualKind::Deviation, 4, 30, 0).all_pass());
        let single = Envelope::new("one", DualKind::Regret, Shape::Singleton(1.0));
        let rep = dual_axiom_check(&single, DualKind::Regret, 3, 30, 0);
        assert!(rep.clauses[0].pass);
        assert!(!rep.all_pass());
    }
}
