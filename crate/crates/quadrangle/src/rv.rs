//! Discrete random variables and statistic intervals.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{QuadError, Result};

/// Probabilities may drift from 1 by this much before being rejected.
pub const PROB_SUM_TOL: f64 = 1e-9;

/// Cumulative probabilities closer than this to a level count as equal to it.
pub const LEVEL_TOL: f64 = 1e-12;

/// A finitely supported random variable. Atoms are sorted by value, equal
/// values are merged and every stored probability is strictly positive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteRv {
    values: Vec<f64>,
    probs: Vec<f64>,
}

impl DiscreteRv {
    pub fn new(values: &[f64], probs: &[f64]) -> Result<Self> {
        if values.len() != probs.len() {
            return Err(QuadError::Invalid(format!(
                "{} values but {} probabilities",
                values.len(),
                probs.len()
            )));
        }
        Self::from_atoms(values.iter().copied().zip(probs.iter().copied()))
    }

    pub fn from_atoms(atoms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut atoms: Vec<(f64, f64)> = atoms.into_iter().collect();
        if atoms.is_empty() {
            return Err(QuadError::Invalid("random variable needs at least one atom".into()));
        }
        let mut sum = 0.0;
        for &(v, p) in &atoms {
            if !v.is_finite() {
                return Err(QuadError::Invalid(format!("non-finite value {v}")));
            }
            if !p.is_finite() || p < 0.0 {
                return Err(QuadError::Invalid(format!("probability {p} is not a finite non-negative number")));
            }
            sum += p;
        }
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(QuadError::Probability { sum });
        }
        atoms.retain(|&(_, p)| p > 0.0);
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut values: Vec<f64> = Vec::with_capacity(atoms.len());
        let mut probs: Vec<f64> = Vec::with_capacity(atoms.len());
        for (v, p) in atoms {
            match values.last() {
                Some(&last) if last == v => *probs.last_mut().unwrap() += p,
                _ => {
                    values.push(v);
                    probs.push(p);
                }
            }
        }
        for p in probs.iter_mut() {
            *p /= sum;
        }
        Ok(DiscreteRv { values, probs })
    }

    /// Equally weighted atoms.
    pub fn uniform(values: &[f64]) -> Result<Self> {
        let n = values.len();
        if n == 0 {
            return Err(QuadError::Invalid("random variable needs at least one atom".into()));
        }
        let p = 1.0 / n as f64;
        Self::from_atoms(values.iter().map(|&v| (v, p)))
    }

    pub fn constant(c: f64) -> Self {
        assert!(c.is_finite(), "constant must be finite");
        DiscreteRv { values: vec![c], probs: vec![1.0] }
    }

    /// Values `xs[i]` with probabilities `probs[i]` on a common scenario space.
    /// Probabilities are trusted to be valid; used for derived variables.
    pub(crate) fn from_scenarios(xs: &[f64], probs: &[f64]) -> Self {
        let mut idx: Vec<usize> = (0..xs.len()).filter(|&i| probs[i] > 0.0).collect();
        idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
        let mut values: Vec<f64> = Vec::with_capacity(idx.len());
        let mut ps: Vec<f64> = Vec::with_capacity(idx.len());
        let total: f64 = idx.iter().map(|&i| probs[i]).sum();
        for i in idx {
            match values.last() {
                Some(&last) if last == xs[i] => *ps.last_mut().unwrap() += probs[i] / total,
                _ => {
                    values.push(xs[i]);
                    ps.push(probs[i] / total);
                }
            }
        }
        DiscreteRv { values, probs: ps }
    }

    /// Public counterpart of the scenario constructor with full validation.
    pub fn from_scenario_values(xs: &[f64], probs: &[f64]) -> Result<Self> {
        Self::new(xs, probs)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().copied().zip(self.probs.iter().copied())
    }

    pub fn is_constant(&self) -> bool {
        self.values.len() == 1
    }

    pub fn expectation(&self) -> f64 {
        self.atoms().map(|(v, p)| v * p).sum()
    }

    /// `E[g(X)]`.
    pub fn expect<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        self.atoms().map(|(v, p)| p * g(v)).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.expectation();
        self.expect(|v| (v - m) * (v - m)).max(0.0)
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    /// `(E|X|^p)^(1/p)` for `p >= 1`; `p = f64::INFINITY` gives `ess sup |X|`.
    pub fn p_norm(&self, p: f64) -> Result<f64> {
        if p.is_nan() || p < 1.0 {
            return Err(QuadError::param("p", format!("norm order must be >= 1, got {p}")));
        }
        if p.is_infinite() {
            return Ok(self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs())));
        }
        if p == 1.0 {
            return Ok(self.expect(f64::abs));
        }
        if p == 2.0 {
            return Ok(self.expect(|v| v * v).sqrt());
        }
        // scale first so large values do not overflow
        let s = self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if s == 0.0 {
            return Ok(0.0);
        }
        Ok(s * self.expect(|v| (v.abs() / s).powf(p)).powf(1.0 / p))
    }

    pub fn l2_norm(&self) -> f64 {
        self.expect(|v| v * v).sqrt()
    }

    pub fn ess_inf(&self) -> f64 {
        self.values[0]
    }

    pub fn ess_sup(&self) -> f64 {
        *self.values.last().unwrap()
    }

    pub fn ess_bounds(&self) -> (f64, f64) {
        (self.ess_inf(), self.ess_sup())
    }

    /// `P(X <= x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.atoms().take_while(|&(v, _)| v <= x).map(|(_, p)| p).sum()
    }

    /// The closed quantile interval `[q-, q+]` at level `alpha` in `[0, 1]`.
    /// `q- = sup{v : F(v) < alpha}` and `q+ = inf{v : F(v) > alpha}`, with the
    /// conventions `q-(0) = ess inf` and `q+(1) = ess sup`.
    pub fn quantile_interval(&self, alpha: f64) -> StatInterval {
        let n = self.values.len();
        let mut lo = self.values[n - 1];
        let mut hi = self.values[n - 1];
        let mut cum = 0.0;
        let mut found_lo = false;
        for i in 0..n {
            cum += self.probs[i];
            let last = i + 1 == n;
            if !found_lo && (cum >= alpha - LEVEL_TOL || last) {
                lo = self.values[i];
                found_lo = true;
            }
            if cum > alpha + LEVEL_TOL || last {
                hi = self.values[i];
                break;
            }
        }
        StatInterval::new(lo, hi)
    }

    /// Value-at-risk: the quantile interval.
    pub fn var(&self, alpha: f64) -> StatInterval {
        self.quantile_interval(alpha)
    }

    /// Conditional value-at-risk by split-mass tail averaging.
    /// `alpha >= 1` returns the limit `ess sup`; `alpha <= 0` gives `E[X]`.
    pub fn cvar(&self, alpha: f64) -> f64 {
        if alpha >= 1.0 {
            return self.ess_sup();
        }
        if alpha <= 0.0 {
            return self.expectation();
        }
        let tail = 1.0 - alpha;
        let mut remaining = tail;
        let mut acc = 0.0;
        for i in (0..self.values.len()).rev() {
            if remaining <= 0.0 {
                break;
            }
            let take = self.probs[i].min(remaining);
            acc += take * self.values[i];
            remaining -= take;
        }
        // rounding can leave a sliver of mass; it belongs to the lowest atom reached
        if remaining > 0.0 {
            acc += remaining * self.values[0];
        }
        acc / tail
    }

    /// Apply `f` pointwise, merging atoms that collide.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> DiscreteRv {
        let xs: Vec<f64> = self.values.iter().map(|&v| f(v)).collect();
        DiscreteRv::from_scenarios(&xs, &self.probs)
    }

    /// `X + c`.
    pub fn shift(&self, c: f64) -> DiscreteRv {
        let values: Vec<f64> = self.values.iter().map(|v| v + c).collect();
        if values.windows(2).all(|w| w[0] < w[1]) {
            DiscreteRv { values, probs: self.probs.clone() }
        } else {
            DiscreteRv::from_scenarios(&values, &self.probs)
        }
    }

    /// `lambda * X`.
    pub fn scale(&self, lambda: f64) -> DiscreteRv {
        if lambda > 0.0 {
            let values: Vec<f64> = self.values.iter().map(|v| v * lambda).collect();
            if values.windows(2).all(|w| w[0] < w[1]) {
                return DiscreteRv { values, probs: self.probs.clone() };
            }
        }
        self.map(|v| v * lambda)
    }

    pub fn neg(&self) -> DiscreteRv {
        DiscreteRv {
            values: self.values.iter().rev().map(|v| -v).collect(),
            probs: self.probs.iter().rev().copied().collect(),
        }
    }

    pub fn abs(&self) -> DiscreteRv {
        self.map(f64::abs)
    }
}

impl fmt::Display for DiscreteRv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (v, p)) in self.atoms().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "({v}, {p})")?;
        }
        write!(f, "}}")
    }
}

/// Checked CVaR: `alpha` must lie in `[0, 1)`.
pub fn cvar_direct(x: &DiscreteRv, alpha: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(QuadError::param("alpha", format!("CVaR level must lie in [0, 1), got {alpha}")));
    }
    Ok(x.cvar(alpha))
}

/// Sum of `lambda_k * X_k` on a shared scenario space given as value vectors.
pub fn combine_scenarios(columns: &[&[f64]], weights: &[f64]) -> Vec<f64> {
    let n = columns.first().map_or(0, |c| c.len());
    (0..n)
        .map(|i| columns.iter().zip(weights).map(|(c, w)| w * c[i]).sum())
        .collect()
}

/// A closed bounded interval `[lo, hi]`, the value type of a statistic.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatInterval {
    pub lo: f64,
    pub hi: f64,
}

impl StatInterval {
    /// Builds `[lo, hi]`; endpoints given in the wrong order by rounding are swapped.
    pub fn new(lo: f64, hi: f64) -> Self {
        if lo <= hi {
            StatInterval { lo, hi }
        } else {
            StatInterval { lo: hi, hi: lo }
        }
    }

    pub fn point(x: f64) -> Self {
        StatInterval { lo: x, hi: x }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        x >= self.lo - tol && x <= self.hi + tol
    }

    pub fn shift(&self, c: f64) -> Self {
        StatInterval::new(self.lo + c, self.hi + c)
    }

    pub fn scale(&self, lambda: f64) -> Self {
        StatInterval::new(self.lo * lambda, self.hi * lambda)
    }

    /// Minkowski sum.
    pub fn add(&self, other: &StatInterval) -> Self {
        StatInterval::new(self.lo + other.lo, self.hi + other.hi)
    }

    pub fn neg(&self) -> Self {
        StatInterval::new(-self.hi, -self.lo)
    }

    pub fn hull(&self, other: &StatInterval) -> Self {
        StatInterval::new(self.lo.min(other.lo), self.hi.max(other.hi))
    }

    /// Largest endpoint discrepancy between two intervals.
    pub fn gap(&self, other: &StatInterval) -> f64 {
        (self.lo - other.lo).abs().max((self.hi - other.hi).abs())
    }

    pub fn intersects(&self, other: &StatInterval, tol: f64) -> bool {
        self.lo <= other.hi + tol && other.lo <= self.hi + tol
    }
}

impl fmt::Display for StatInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_point() {
            write!(f, "{}", self.lo)
        } else {
            write!(f, "[{}, {}]", self.lo, self.hi)
        }
    }
}

/// Merge overlapping or touching intervals into a sorted disjoint union.
pub fn merge_intervals(mut parts: Vec<StatInterval>, tol: f64) -> Vec<StatInterval> {
    parts.sort_by(|a, b| a.lo.partial_cmp(&b.lo).unwrap_or(Ordering::Equal));
    let mut out: Vec<StatInterval> = Vec::with_capacity(parts.len());
    for p in parts {
        match out.last_mut() {
            Some(last) if p.lo <= last.hi + tol => last.hi = last.hi.max(p.hi),
            _ => out.push(p),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u15() -> DiscreteRv {
        DiscreteRv::uniform(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap()
    }

    #[test]
    fn merges_and_sorts() {
        let x = DiscreteRv::new(&[3.0, 1.0, 3.0], &[0.25, 0.5, 0.25]).unwrap();
        assert_eq!(x.values(), &[1.0, 3.0]);
        assert_eq!(x.probs(), &[0.5, 0.5]);
    }

    #[test]
    fn rejects_bad_probabilities() {
        assert!(matches!(
            DiscreteRv::new(&[1.0, 2.0], &[0.5, 0.6]),
            Err(QuadError::Probability { .. })
        ));
        assert!(DiscreteRv::new(&[1.0, 2.0], &[1.5, -0.5]).is_err());
        assert!(DiscreteRv::new(&[f64::NAN], &[1.0]).is_err());
        let x = DiscreteRv::new(&[1.0, 2.0], &[0.5, 0.5 + 5e-10]).unwrap();
        assert!((x.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn moments_and_norms() {
        let x = u15();
        assert_eq!(x.expectation(), 3.0);
        assert!((x.variance() - 2.0).abs() < 1e-14);
        assert!((x.p_norm(2.0).unwrap() - 11.0_f64.sqrt()).abs() < 1e-14);
        assert_eq!(x.p_norm(f64::INFINITY).unwrap(), 5.0);
        assert!(x.p_norm(0.5).is_err());
        assert_eq!(x.ess_bounds(), (1.0, 5.0));
    }

    #[test]
    fn quantile_interval_at_mass_boundaries() {
        let x = u15();
        assert_eq!(x.quantile_interval(0.6), StatInterval::new(3.0, 4.0));
        assert_eq!(x.quantile_interval(0.5), StatInterval::point(3.0));
        assert_eq!(x.quantile_interval(0.0), StatInterval::point(1.0));
        assert_eq!(x.quantile_interval(1.0), StatInterval::point(5.0));
        let b = DiscreteRv::uniform(&[0.0, 1.0]).unwrap();
        assert_eq!(b.quantile_interval(0.5), StatInterval::new(0.0, 1.0));
    }

    #[test]
    fn cvar_split_mass() {
        let x = u15();
        assert!((x.cvar(0.6) - 4.5).abs() < 1e-14);
        assert!((x.cvar(0.7) - (0.1 * 4.0 + 0.2 * 5.0) / 0.3).abs() < 1e-12);
        assert_eq!(x.cvar(0.0), 3.0);
        assert!(cvar_direct(&x, 1.0).is_err());
    }

    #[test]
    fn shift_scale_neg() {
        let x = u15();
        assert_eq!(x.shift(1.0).expectation(), 4.0);
        assert_eq!(x.scale(-1.0), x.neg());
        assert_eq!(x.scale(0.0), DiscreteRv::constant(0.0));
        let a = DiscreteRv::uniform(&[-1.0, 1.0]).unwrap().abs();
        assert_eq!(a, DiscreteRv::constant(1.0));
    }

    #[test]
    fn interval_arithmetic() {
        let a = StatInterval::new(1.0, 2.0);
        let b = StatInterval::new(-1.0, 0.5);
        assert_eq!(a.add(&b), StatInterval::new(0.0, 2.5));
        assert_eq!(a.scale(-2.0), StatInterval::new(-4.0, -2.0));
        assert_eq!(b.neg(), StatInterval::new(-0.5, 1.0));
        let m = merge_intervals(vec![a, b, StatInterval::new(5.0, 6.0)], 0.0);
        assert_eq!(m.len(), 3);
        let m = merge_intervals(vec![a, StatInterval::new(0.0, 1.0)], 0.0);
        assert_eq!(m, vec![StatInterval::new(0.0, 2.0)]);
    }
}
