//! Stochastic divergences and divergence roots on the density space.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use super::phi::DivergenceFn;
use crate::sampling::rng;
use rand::Rng;

/// Tolerance on `E[Q] = 1` for normalized densities.
pub const MEAN_TOL: f64 = 1e-9;

pub type DensityFn = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum JForm {
    /// `J(Q) = E[phi(Q)]`.
    Phi(DivergenceFn),
    /// Arbitrary functional of `(q, probs)`.
    General(DensityFn),
}

/// A dual functional `J` over density vectors. With `normalized` set its
/// domain is cut to `E[Q] = 1`.
#[derive(Clone)]
pub struct StochasticDivergenceJ {
    pub label: String,
    pub form: JForm,
    pub normalized: bool,
}

impl fmt::Debug for StochasticDivergenceJ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StochasticDivergenceJ").field("label", &self.label).field("normalized", &self.normalized).finish()
    }
}

impl StochasticDivergenceJ {
    pub fn from_phi(phi: DivergenceFn, normalized: bool) -> Self {
        let label = if normalized { format!("E[{}(Q)] | E[Q]=1", phi.name) } else { format!("E[{}(Q)]", phi.name) };
        StochasticDivergenceJ { label, form: JForm::Phi(phi), normalized }
    }

    pub fn general(label: impl Into<String>, eval: DensityFn, normalized: bool) -> Self {
        StochasticDivergenceJ { label: label.into(), form: JForm::General(eval), normalized }
    }

    pub fn phi(&self) -> Option<&DivergenceFn> {
        match &self.form {
            JForm::Phi(d) => Some(d),
            JForm::General(_) => None,
        }
    }

    /// `J(Q)`, with `+inf` outside the domain.
    pub fn value(&self, q: &[f64], probs: &[f64]) -> f64 {
        if self.normalized {
            let m: f64 = q.iter().zip(probs).map(|(a, b)| a * b).sum();
            if (m - 1.0).abs() > MEAN_TOL {
                return f64::INFINITY;
            }
        }
        match &self.form {
            JForm::Phi(d) => divergence_value(d, q, probs),
            JForm::General(f) => f(q, probs),
        }
    }
}

/// `sum_i p_i phi(q_i)`.
pub fn divergence_value(phi: &DivergenceFn, q: &[f64], probs: &[f64]) -> f64 {
    let mut s = 0.0;
    for (&qi, &pi) in q.iter().zip(probs) {
        if pi > 0.0 {
            s += pi * phi.phi(qi);
        }
    }
    s
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    DivergenceRoot,
    StochasticDivergence,
    General,
}

#[derive(Clone, Debug, Serialize)]
pub struct Clause {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassificationReport {
    pub label: String,
    pub clauses: Vec<Clause>,
    pub classification: Classification,
}

/// Sampled clause checks on an `n`-atom space with random probabilities.
pub fn classify_divergence(j: &StochasticDivergenceJ, atoms: usize, budget: usize, seed: u64) -> ClassificationReport {
    let n = atoms.max(2);
    let mut r = rng(seed);
    let mut probs: Vec<f64> = (0..n).map(|_| r.gen_range(0.2..1.0)).collect();
    let s: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= s);
    let ones = vec![1.0; n];
    let mean = |q: &[f64]| q.iter().zip(&probs).map(|(a, b)| a * b).sum::<f64>();
    // mean-zero perturbation directions
    let direction = |r: &mut rand_chacha::ChaCha8Rng| {
        let mut d: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
        let m = mean(&d);
        d.iter_mut().for_each(|v| *v -= m);
        d
    };
    let mut clauses = Vec::new();

    let at_one = j.value(&ones, &probs);
    clauses.push(Clause { name: "J(1)=0", pass: at_one.abs() <= 1e-12, detail: format!("J(1) = {at_one}") });

    let mut neg = None;
    let mut unique = None;
    for _ in 0..budget {
        let d = direction(&mut r);
        let t: f64 = r.gen_range(0.0..0.9);
        let q: Vec<f64> = d.iter().map(|v| 1.0 + t * v).collect();
        let v = j.value(&q, &probs);
        if v < -1e-12 && neg.is_none() {
            neg = Some(format!("J = {v} at {q:?}"));
        }
        let step = 10f64.powi(-(r.gen_range(1..5)));
        let q: Vec<f64> = d.iter().map(|v| 1.0 + step * v).collect();
        let v = j.value(&q, &probs);
        if !(v > 0.0) && d.iter().any(|x| x.abs() > 1e-12) && unique.is_none() {
            unique = Some(format!("J = {v} at distance {step}"));
        }
    }
    clauses.push(Clause { name: "nonnegative", pass: neg.is_none(), detail: neg.unwrap_or_else(|| "ok".into()) });
    clauses.push(Clause {
        name: "unique minimizer at 1",
        pass: unique.is_none(),
        detail: unique.unwrap_or_else(|| "ok".into()),
    });

    // domain closure: negative densities excluded, positive ones admitted
    let mut q = ones.clone();
    let k = (0..n).max_by(|&a, &b| probs[a].partial_cmp(&probs[b]).unwrap()).unwrap();
    q[k] = -0.5;
    let rest = (1.0 - probs[k] * q[k]) / (1.0 - probs[k]);
    for (i, qi) in q.iter_mut().enumerate() {
        if i != k {
            *qi = rest;
        }
    }
    let neg_excluded = !j.value(&q, &probs).is_finite();
    clauses.push(Clause {
        name: "Q < 0 excluded",
        pass: neg_excluded,
        detail: format!("J at a density with a negative atom = {}", j.value(&q, &probs)),
    });
    let mut positive_ok = true;
    for _ in 0..budget.min(50) {
        let mut q: Vec<f64> = (0..n).map(|_| r.gen_range(0.05..3.0)).collect();
        let m = mean(&q);
        q.iter_mut().for_each(|v| *v /= m);
        if !j.value(&q, &probs).is_finite() {
            positive_ok = false;
        }
    }
    clauses.push(Clause {
        name: "Q > 0 with E[Q]=1 admitted",
        pass: positive_ok,
        detail: if positive_ok { "ok".into() } else { "infinite at a positive density".into() },
    });
    let scaled = vec![1.5; n];
    let off_mean_admitted = j.value(&scaled, &probs).is_finite();
    clauses.push(Clause {
        name: "E[Q] != 1 admitted",
        pass: off_mean_admitted,
        detail: format!("J(1.5) = {}", j.value(&scaled, &probs)),
    });

    let base = clauses[..5].iter().all(|c| c.pass);
    let classification = if base && off_mean_admitted {
        Classification::DivergenceRoot
    } else if base {
        Classification::StochasticDivergence
    } else {
        Classification::General
    };
    ClassificationReport { label: j.label.clone(), clauses, classification }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direct_sums() {
        let p = [0.5, 0.5];
        assert_eq!(divergence_value(&DivergenceFn::kl(), &[1.0, 1.0], &p), 0.0);
        assert!((divergence_value(&DivergenceFn::pearson(), &[0.0, 2.0], &p) - 1.0).abs() < 1e-15);
        assert!((divergence_value(&DivergenceFn::tv(), &[0.5, 1.5], &p) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn kl_classifications() {
        let sd = classify_divergence(&StochasticDivergenceJ::from_phi(DivergenceFn::kl(), true), 4, 200, 1);
        assert_eq!(sd.classification, Classification::StochasticDivergence);
        let root = classify_divergence(&StochasticDivergenceJ::from_phi(DivergenceFn::kl(), false), 4, 200, 1);
        assert_eq!(root.classification, Classification::DivergenceRoot);
    }

    #[test]
    fn norm_fails_normalization() {
        let j = StochasticDivergenceJ::general(
            "l2",
            Arc::new(|q: &[f64], p: &[f64]| q.iter().zip(p).map(|(a, b)| a * a * b).sum::<f64>().sqrt()),
            false,
        );
        let rep = classify_divergence(&j, 3, 50, 0);
        assert!(!rep.clauses[0].pass);
        assert_eq!(rep.classification, Classification::General);
    }
}
