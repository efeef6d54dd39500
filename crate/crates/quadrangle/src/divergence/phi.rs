//! Scalar divergence functions and their conjugates.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{QuadError, Result};
use crate::loss::ScalarFn;
use crate::solvers::golden_section;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DivergenceKind {
    /// `phi = +inf` on negative arguments.
    Divergence,
    Extended,
}

/// Convex `phi` with `phi(1) = 0`, its conjugate and domain closure `[a, b]`.
#[derive(Clone)]
pub struct DivergenceFn {
    pub name: String,
    phi: ScalarFn,
    conj: ScalarFn,
    pub dom: (f64, f64),
    pub kind: DivergenceKind,
}

impl fmt::Debug for DivergenceFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DivergenceFn").field("name", &self.name).field("dom", &self.dom).finish()
    }
}

pub const PHI_NAMES: [&str; 5] = ["kl", "tv", "pearson", "extended_pearson", "gen_extended_pearson"];

fn sq(x: f64) -> f64 {
    x * x
}

impl DivergenceFn {
    /// A user-supplied pair, checked for normalization and conjugacy.
    pub fn custom(name: impl Into<String>, phi: ScalarFn, conj: ScalarFn, dom: (f64, f64)) -> Result<Self> {
        let kind = if dom.0 >= 0.0 { DivergenceKind::Divergence } else { DivergenceKind::Extended };
        let d = DivergenceFn { name: name.into(), phi, conj, dom, kind };
        d.validate()?;
        Ok(d)
    }

    fn builtin(name: &str, phi: ScalarFn, conj: ScalarFn, dom: (f64, f64)) -> Self {
        let kind = if dom.0 >= 0.0 { DivergenceKind::Divergence } else { DivergenceKind::Extended };
        DivergenceFn { name: name.into(), phi, conj, dom, kind }
    }

    pub fn kl() -> Self {
        Self::builtin(
            "kl",
            Arc::new(|x: f64| {
                if x > 0.0 {
                    x * x.ln() - x + 1.0
                } else if x == 0.0 {
                    1.0
                } else {
                    f64::INFINITY
                }
            }),
            Arc::new(|z: f64| z.exp() - 1.0),
            (0.0, f64::INFINITY),
        )
    }

    pub fn tv() -> Self {
        Self::builtin(
            "tv",
            Arc::new(|x: f64| if x >= 0.0 { (x - 1.0).abs() } else { f64::INFINITY }),
            Arc::new(|z: f64| if z <= 1.0 { -1.0 + (z + 1.0).max(0.0) } else { f64::INFINITY }),
            (0.0, f64::INFINITY),
        )
    }

    pub fn pearson() -> Self {
        Self::builtin(
            "pearson",
            Arc::new(|x: f64| if x >= 0.0 { sq(x - 1.0) } else { f64::INFINITY }),
            Arc::new(|z: f64| if z >= -2.0 { sq(z + 2.0) / 4.0 - 1.0 } else { -1.0 }),
            (0.0, f64::INFINITY),
        )
    }

    pub fn extended_pearson() -> Self {
        Self::builtin(
            "extended_pearson",
            Arc::new(|x: f64| sq(x - 1.0)),
            Arc::new(|z: f64| z * z / 4.0 + z),
            (f64::NEG_INFINITY, f64::INFINITY),
        )
    }

    /// Asymmetric Pearson divergence whose quadrangle has the `q`-expectile
    /// as statistic: curvature `1/q` above 1 and `1/(1-q)` below.
    pub fn gen_extended_pearson(q: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(QuadError::param("q", format!("must lie in (0, 1), got {q}")));
        }
        Ok(Self::builtin(
            "gen_extended_pearson",
            Arc::new(move |x: f64| if x > 1.0 { sq(x - 1.0) / q } else { sq(x - 1.0) / (1.0 - q) }),
            Arc::new(move |z: f64| if z > 0.0 { q * z * z / 4.0 + z } else { (1.0 - q) * z * z / 4.0 + z }),
            (f64::NEG_INFINITY, f64::INFINITY),
        ))
    }

    /// Registry lookup; `q` is used by `gen_extended_pearson` only.
    pub fn named(name: &str, q: Option<f64>) -> Result<Self> {
        match name {
            "kl" => Ok(Self::kl()),
            "tv" => Ok(Self::tv()),
            "pearson" => Ok(Self::pearson()),
            "extended_pearson" => Ok(Self::extended_pearson()),
            "gen_extended_pearson" => {
                Self::gen_extended_pearson(q.ok_or_else(|| QuadError::param("q", "gen_extended_pearson needs q"))?)
            }
            other => Err(QuadError::Invalid(format!("unknown divergence {other}"))),
        }
    }

    pub fn phi(&self, x: f64) -> f64 {
        if x < self.dom.0 || x > self.dom.1 {
            return f64::INFINITY;
        }
        (self.phi)(x)
    }

    pub fn conj(&self, z: f64) -> f64 {
        (self.conj)(z)
    }

    pub fn phi_fn(&self) -> ScalarFn {
        self.phi.clone()
    }

    pub fn conj_fn(&self) -> ScalarFn {
        self.conj.clone()
    }

    /// Recession function of the conjugate, `sup_{y in dom} x y`.
    pub fn recession(&self, x: f64) -> f64 {
        if x > 0.0 {
            if self.dom.1.is_finite() {
                x * self.dom.1
            } else {
                f64::INFINITY
            }
        } else if x < 0.0 {
            if self.dom.0.is_finite() {
                x * self.dom.0
            } else {
                f64::INFINITY
            }
        } else {
            0.0
        }
    }

    /// Sublevel interval `{y : phi(y) <= level}`; `level >= 0`.
    pub fn sublevel(&self, level: f64) -> (f64, f64) {
        let grow = |dir: f64, edge: f64| -> f64 {
            let mut step = 1.0;
            loop {
                let y = 1.0 + dir * step;
                if (dir < 0.0 && y <= edge) || (dir > 0.0 && y >= edge) {
                    return if self.phi(edge) <= level { edge } else { self.boundary(1.0, edge, level) };
                }
                if self.phi(y) > level {
                    return self.boundary(1.0, y, level);
                }
                step *= 2.0;
                if step > 1e15 {
                    return y;
                }
            }
        };
        (grow(-1.0, self.dom.0), grow(1.0, self.dom.1))
    }

    fn boundary(&self, inside: f64, outside: f64, level: f64) -> f64 {
        let (mut a, mut b) = (inside, outside);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m == a || m == b {
                break;
            }
            if self.phi(m) <= level {
                a = m;
            } else {
                b = m;
            }
        }
        a
    }

    /// Numerical conjugate `sup_y {z y - phi(y)}` over the domain.
    pub fn numeric_conj(&self, z: f64) -> f64 {
        let lo = self.dom.0.max(-1e3);
        let hi = self.dom.1.min(1e3);
        let (_, v) = golden_section(|y| self.phi(y) - z * y, lo, hi, 1e-13);
        let mut best = -v;
        for e in [lo, hi] {
            let w = z * e - self.phi(e);
            if w > best {
                best = w;
            }
        }
        best
    }

    /// `phi(1) = 0`, 1 interior to the domain, convexity on a grid and the
    /// Fenchel-Young equality against the numerical conjugate.
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Err(QuadError::Axiom { kind: "divergence", reason });
        if self.phi(1.0).abs() > 1e-12 {
            return bad(format!("phi(1) = {} is not 0", self.phi(1.0)));
        }
        if !(self.dom.0 < 1.0 && self.dom.1 > 1.0) {
            return bad("1 is not interior to the domain".into());
        }
        for k in 0..40 {
            let a = -1.0 + 0.1 * k as f64;
            let b = a + 0.7;
            let (fa, fb, fm) = (self.phi(a), self.phi(b), self.phi(0.5 * (a + b)));
            if fa.is_finite() && fb.is_finite() && fm > 0.5 * (fa + fb) + 1e-10 {
                return bad(format!("phi is not convex between {a} and {b}"));
            }
        }
        for k in 0..=24 {
            let z = -3.0 + 0.25 * k as f64;
            let c = self.conj(z);
            if !c.is_finite() {
                continue;
            }
            let n = self.numeric_conj(z);
            if (c - n).abs() > 1e-8 * (1.0 + c.abs()) {
                return bad(format!("conjugate mismatch at {z}: {c} vs {n}"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_conjugates_verify() {
        for name in PHI_NAMES {
            let d = DivergenceFn::named(name, Some(0.3)).unwrap();
            d.validate().unwrap();
        }
    }

    #[test]
    fn wrong_conjugate_is_rejected() {
        let r = DivergenceFn::custom(
            "bad",
            Arc::new(|x: f64| (x - 1.0) * (x - 1.0)),
            Arc::new(|z: f64| z * z / 2.0 + z),
            (f64::NEG_INFINITY, f64::INFINITY),
        );
        assert!(r.is_err());
    }

    #[test]
    fn sublevel_of_kl() {
        let (a, b) = DivergenceFn::kl().sublevel(0.5);
        assert!((a - 0.0).abs() < 1e-12 || DivergenceFn::kl().phi(a) <= 0.5);
        assert!((DivergenceFn::kl().phi(b) - 0.5).abs() < 1e-9);
        let (a, b) = DivergenceFn::kl().sublevel(2.0);
        assert_eq!(a, 0.0);
        assert!(b > 1.0);
    }
}
