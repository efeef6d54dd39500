//! Scalar losses `e(x)` generating expectation-type errors `E[e(X)]`.

use std::fmt;
use std::sync::Arc;

use crate::error::{QuadError, Result};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A convex scalar loss with one-sided derivatives. Piecewise-linear losses
/// also carry their affine pieces `e(x) = max_k (a_k x + b_k)`.
#[derive(Clone)]
pub struct ScalarLoss {
    pub name: String,
    e: ScalarFn,
    d_left: ScalarFn,
    d_right: ScalarFn,
    pieces: Option<Vec<(f64, f64)>>,
}

impl fmt::Debug for ScalarLoss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarLoss").field("name", &self.name).field("pieces", &self.pieces).finish()
    }
}

impl ScalarLoss {
    pub fn new(name: impl Into<String>, e: ScalarFn, d_left: ScalarFn, d_right: ScalarFn) -> Self {
        ScalarLoss { name: name.into(), e, d_left, d_right, pieces: None }
    }

    /// `e(x) = max_k (a_k x + b_k)`.
    pub fn from_pieces(name: impl Into<String>, pieces: Vec<(f64, f64)>) -> Result<Self> {
        if pieces.is_empty() || pieces.iter().any(|(a, b)| !a.is_finite() || !b.is_finite()) {
            return Err(QuadError::Invalid("piecewise-linear loss needs finite pieces".into()));
        }
        let p1 = pieces.clone();
        let p2 = pieces.clone();
        let p3 = pieces.clone();
        let e = move |x: f64| p1.iter().map(|(a, b)| a * x + b).fold(f64::NEG_INFINITY, f64::max);
        let active = move |pcs: &[(f64, f64)], x: f64, left: bool| {
            let m = pcs.iter().map(|(a, b)| a * x + b).fold(f64::NEG_INFINITY, f64::max);
            let tol = 1e-12 * (1.0 + m.abs());
            let it = pcs.iter().filter(|(a, b)| a * x + b >= m - tol).map(|(a, _)| *a);
            if left {
                it.fold(f64::INFINITY, f64::min)
            } else {
                it.fold(f64::NEG_INFINITY, f64::max)
            }
        };
        Ok(ScalarLoss {
            name: name.into(),
            e: Arc::new(e),
            d_left: Arc::new(move |x| active(&p2, x, true)),
            d_right: Arc::new(move |x| active(&p3, x, false)),
            pieces: Some(pieces),
        })
    }

    /// Normalized Koenker-Bassett loss `alpha/(1-alpha) x+ + x-`.
    pub fn koenker_bassett(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(QuadError::param("alpha", format!("must lie in (0, 1), got {alpha}")));
        }
        Self::from_pieces(format!("koenker_bassett({alpha})"), vec![(alpha / (1.0 - alpha), 0.0), (-1.0, 0.0)])
    }

    /// Vapnik's insensitive loss `(|x| - eps)+`.
    pub fn vapnik(eps: f64) -> Result<Self> {
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(QuadError::param("eps", format!("must be a finite non-negative number, got {eps}")));
        }
        Self::from_pieces(format!("vapnik({eps})"), vec![(0.0, 0.0), (1.0, -eps), (-1.0, -eps)])
    }

    pub fn absolute() -> Self {
        Self::from_pieces("absolute", vec![(1.0, 0.0), (-1.0, 0.0)]).unwrap()
    }

    pub fn squared() -> Self {
        ScalarLoss::new("squared", Arc::new(|x| x * x), Arc::new(|x| 2.0 * x), Arc::new(|x| 2.0 * x))
    }

    /// `q x+^2 + (1-q) x-^2`.
    pub fn asymmetric_squared(q: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(QuadError::param("q", format!("must lie in (0, 1), got {q}")));
        }
        let d = move |x: f64| if x > 0.0 { 2.0 * q * x } else { 2.0 * (1.0 - q) * x };
        Ok(ScalarLoss::new(
            format!("asymmetric_squared({q})"),
            Arc::new(move |x| if x > 0.0 { q * x * x } else { (1.0 - q) * x * x }),
            Arc::new(d),
            Arc::new(d),
        ))
    }

    pub fn value(&self, x: f64) -> f64 {
        (self.e)(x)
    }

    pub fn left_derivative(&self, x: f64) -> f64 {
        (self.d_left)(x)
    }

    pub fn right_derivative(&self, x: f64) -> f64 {
        (self.d_right)(x)
    }

    pub fn pieces(&self) -> Option<&[(f64, f64)]> {
        self.pieces.as_deref()
    }

    /// Kink locations of a piecewise-linear loss.
    pub fn kinks(&self) -> Vec<f64> {
        let Some(p) = &self.pieces else { return Vec::new() };
        let mut out = Vec::new();
        for i in 0..p.len() {
            for j in (i + 1)..p.len() {
                let (a1, b1) = p[i];
                let (a2, b2) = p[j];
                if a1 != a2 {
                    let x = (b2 - b1) / (a1 - a2);
                    let v = a1 * x + b1;
                    if (self.value(x) - v).abs() <= 1e-12 * (1.0 + v.abs()) {
                        out.push(x);
                    }
                }
            }
        }
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    pub fn value_fn(&self) -> ScalarFn {
        self.e.clone()
    }

    /// Check the scalar-loss conditions on a grid: `e(0) = 0`, `e >= 0`,
    /// convexity, and growth on both sides of the origin.
    pub fn validate(&self) -> Result<()> {
        let e0 = self.value(0.0);
        if e0.abs() > 1e-12 {
            return Err(QuadError::Axiom { kind: "scalar loss", reason: format!("e(0) = {e0}, expected 0") });
        }
        let grid: Vec<f64> = (-400..=400).map(|k| k as f64 * 0.025).collect();
        for &x in &grid {
            let v = self.value(x);
            if v.is_nan() || v < -1e-12 {
                return Err(QuadError::Axiom { kind: "scalar loss", reason: format!("e({x}) = {v} is negative") });
            }
        }
        for w in grid.windows(3) {
            let (a, m, b) = (self.value(w[0]), self.value(w[1]), self.value(w[2]));
            if m > 0.5 * (a + b) + 1e-10 * (1.0 + a.abs() + b.abs()) {
                return Err(QuadError::Axiom { kind: "scalar loss", reason: format!("not convex near {}", w[1]) });
            }
        }
        let sweep = |sign: f64| (0..=20).any(|k| self.value(sign * 2f64.powi(k)) > 0.0);
        if !sweep(-1.0) || !sweep(1.0) {
            return Err(QuadError::Axiom {
                kind: "scalar loss",
                reason: "e must be positive somewhere on each side of the origin".into(),
            });
        }
        Ok(())
    }

    /// `e(x) <= |x|` for `x < 0`, sampled.
    pub fn is_monotone_generating(&self) -> bool {
        (1..=2000).all(|k| {
            let x = -(k as f64) * 0.01;
            self.value(x) <= x.abs() + 1e-12
        }) && (1..=20).all(|k| {
            let x = -(2f64.powi(k));
            self.value(x) <= x.abs() * (1.0 + 1e-12)
        })
    }

    /// Two-piece linear through the origin.
    pub fn is_positively_homogeneous(&self) -> bool {
        let a = self.value(1.0);
        let b = self.value(-1.0);
        (1..=40).all(|k| {
            let t = k as f64 * 0.25;
            (self.value(t) - a * t).abs() <= 1e-12 * (1.0 + t) && (self.value(-t) - b * t).abs() <= 1e-12 * (1.0 + t)
        })
    }

    /// `e(x) > 0` for every sampled `x != 0`.
    pub fn is_strictly_positive(&self) -> bool {
        (1..=400).all(|k| {
            let t = k as f64 * 0.0125;
            self.value(t) > 0.0 && self.value(-t) > 0.0
        })
    }
}

/// An error of the form `max_j (E[max_k (a_jk X + b_jk)] + c_j)`, the shape
/// solved by linear programming in regression and portfolio problems.
#[derive(Clone, Debug, PartialEq)]
pub struct PwlError {
    pub terms: Vec<PwlTerm>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PwlTerm {
    pub pieces: Vec<(f64, f64)>,
    pub constant: f64,
}

impl PwlError {
    pub fn single(pieces: Vec<(f64, f64)>) -> Self {
        PwlError { terms: vec![PwlTerm { pieces, constant: 0.0 }] }
    }

    /// Value at scenario residuals `z` with probabilities `p`.
    pub fn value(&self, z: &[f64], p: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let s: f64 = z
                    .iter()
                    .zip(p)
                    .map(|(&zi, &pi)| pi * t.pieces.iter().map(|(a, b)| a * zi + b).fold(f64::NEG_INFINITY, f64::max))
                    .sum();
                s + t.constant
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// The matching regret pieces: every piece gains slope one.
    pub fn to_regret(&self) -> PwlError {
        PwlError {
            terms: self
                .terms
                .iter()
                .map(|t| PwlTerm { pieces: t.pieces.iter().map(|&(a, b)| (a + 1.0, b)).collect(), constant: t.constant })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn koenker_bassett_shape() {
        let l = ScalarLoss::koenker_bassett(0.75).unwrap();
        assert_eq!(l.value(1.0), 3.0);
        assert_eq!(l.value(-2.0), 2.0);
        assert_eq!(l.left_derivative(0.0), -1.0);
        assert_eq!(l.right_derivative(0.0), 3.0);
        assert_eq!(l.kinks(), vec![0.0]);
        assert!(l.validate().is_ok());
        assert!(l.is_positively_homogeneous() && l.is_monotone_generating() && l.is_strictly_positive());
        assert!(ScalarLoss::koenker_bassett(1.0).is_err());
    }

    #[test]
    fn vapnik_shape() {
        let l = ScalarLoss::vapnik(0.5).unwrap();
        assert_eq!(l.value(0.3), 0.0);
        assert_eq!(l.value(-1.5), 1.0);
        assert_eq!(l.kinks(), vec![-0.5, 0.5]);
        assert_eq!(l.right_derivative(-0.5), 0.0);
        assert_eq!(l.left_derivative(-0.5), -1.0);
        assert!(!l.is_strictly_positive());
        assert!(!l.is_positively_homogeneous());
    }

    #[test]
    fn rejects_one_sided_loss() {
        let l = ScalarLoss::from_pieces("plus", vec![(0.0, 0.0), (1.0, 0.0)]).unwrap();
        assert!(l.validate().is_err());
        let sq = ScalarLoss::squared();
        assert!(sq.validate().is_ok());
        assert!(!sq.is_monotone_generating());
    }

    #[test]
    fn pwl_error_value() {
        let e = PwlError {
            terms: vec![
                PwlTerm { pieces: vec![(-1.0, 0.0)], constant: 0.0 },
                PwlTerm { pieces: vec![(0.0, 0.0), (2.0, 0.0)], constant: 0.0 },
            ],
        };
        // max{-E[Z], 2 E[Z+]} at Z uniform on {-1, 1}
        assert_eq!(e.value(&[-1.0, 1.0], &[0.5, 0.5]), 1.0);
    }
}
