//! The catalog of named quadrangles with closed-form members.

pub mod special;

use serde::{Deserialize, Serialize};

use crate::constructions::{project_error, ErrorFn};
use crate::error::{QuadError, Result};
use crate::loss::{PwlError, PwlTerm, ScalarLoss};
use crate::quartet::{functional, statistic_fn, Flags, Quartet};
use crate::rv::{DiscreteRv, StatInterval};

pub use special::{
    cvar2_risk, cvar_integral, cvar_norm, cvar_positive_integral, expectile_value, qsa_risk, qsa_statistic,
    qsau_alpha_samples, qsau_alpha_set, qsau_precondition, qsau_risk, qsau_statistic_union,
};

use special::expectile_unchecked;

/// A named catalog family with its parameter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// Mean with standard deviation: `R = E + lambda sigma`.
    StandardMean { lambda: f64 },
    /// Quantile statistic with CVaR risk.
    Quantile { alpha: f64 },
    /// CVaR statistic with second-order superquantile risk.
    Cvar2 { alpha: f64 },
    /// Symmetric quantile average with the CVaR-norm error.
    Qsa { alpha: f64 },
    /// Vapnik's insensitive error.
    Qsau { eps: f64 },
    /// Expectile via asymmetric mean squares.
    ExpectileMse { q: f64 },
    /// Expectile as a coherent risk, `K = (1-q)/(2q-1) > 0`.
    ExpectilePl { k: f64 },
    /// Mean with upper semideviation.
    MeanPl,
    /// Mean shifted by `x`.
    BiasedMean { x: f64 },
}

pub const FAMILY_NAMES: [&str; 9] =
    ["standard_mean", "quantile", "cvar2", "qsa", "qsau", "expectile_mse", "expectile_pl", "mean_pl", "biased_mean"];

fn pos(x: f64) -> f64 {
    x.max(0.0)
}

fn neg(x: f64) -> f64 {
    (-x).max(0.0)
}

fn level(name: &'static str, a: f64) -> Result<()> {
    if a > 0.0 && a < 1.0 {
        Ok(())
    } else {
        Err(QuadError::param(name, format!("must lie in (0, 1), got {a}")))
    }
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::StandardMean { .. } => "standard_mean",
            Family::Quantile { .. } => "quantile",
            Family::Cvar2 { .. } => "cvar2",
            Family::Qsa { .. } => "qsa",
            Family::Qsau { .. } => "qsau",
            Family::ExpectileMse { .. } => "expectile_mse",
            Family::ExpectilePl { .. } => "expectile_pl",
            Family::MeanPl => "mean_pl",
            Family::BiasedMean { .. } => "biased_mean",
        }
    }

    /// One representative of every family, used by sweeps and self-checks.
    pub fn defaults() -> Vec<Family> {
        vec![
            Family::StandardMean { lambda: 1.0 },
            Family::Quantile { alpha: 0.7 },
            Family::Cvar2 { alpha: 0.6 },
            Family::Qsa { alpha: 0.4 },
            Family::Qsau { eps: 0.1 },
            Family::ExpectileMse { q: 0.7 },
            Family::ExpectilePl { k: 0.5 },
            Family::MeanPl,
            Family::BiasedMean { x: 0.3 },
        ]
    }

    /// Build from a name and a parameter lookup.
    pub fn from_name(name: &str, get: &dyn Fn(&str) -> Option<f64>) -> Result<Family> {
        let need = |key: &'static str| {
            get(key).ok_or_else(|| QuadError::param(key, format!("family {name} needs parameter {key}")))
        };
        let f = match name {
            "standard_mean" => Family::StandardMean { lambda: get("lambda").unwrap_or(1.0) },
            "quantile" => Family::Quantile { alpha: need("alpha")? },
            "cvar2" => Family::Cvar2 { alpha: need("alpha")? },
            "qsa" => Family::Qsa { alpha: need("alpha")? },
            "qsau" => Family::Qsau { eps: need("eps")? },
            "expectile_mse" => Family::ExpectileMse { q: need("q")? },
            "expectile_pl" => match (get("k"), get("q")) {
                (Some(k), _) => Family::ExpectilePl { k },
                (None, Some(q)) => Family::ExpectilePl { k: (1.0 - q) / (2.0 * q - 1.0) },
                _ => return Err(QuadError::param("k", "expectile_pl needs k or q")),
            },
            "mean_pl" => Family::MeanPl,
            "biased_mean" => Family::BiasedMean { x: need("x")? },
            other => return Err(QuadError::Invalid(format!("unknown family {other}"))),
        };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Family::StandardMean { lambda } => {
                if !(lambda > 0.0 && lambda.is_finite()) {
                    return Err(QuadError::param("lambda", format!("must be positive, got {lambda}")));
                }
            }
            Family::Quantile { alpha } | Family::Cvar2 { alpha } => level("alpha", alpha)?,
            Family::Qsa { alpha } => {
                if !(0.0..1.0).contains(&alpha) {
                    return Err(QuadError::param("alpha", format!("must lie in [0, 1), got {alpha}")));
                }
            }
            Family::Qsau { eps } => {
                if !(eps >= 0.0 && eps.is_finite()) {
                    return Err(QuadError::param("eps", format!("must be non-negative, got {eps}")));
                }
            }
            Family::ExpectileMse { q } => level("q", q)?,
            Family::ExpectilePl { k } => {
                if !(k > 0.0 && k.is_finite()) {
                    return Err(QuadError::param("k", format!("must be positive, got {k}")));
                }
            }
            Family::MeanPl => {}
            Family::BiasedMean { x } => {
                if !x.is_finite() {
                    return Err(QuadError::param("x", "must be finite"));
                }
            }
        }
        Ok(())
    }

    /// Error functional with its generating structure, for regression.
    pub fn error_fn(&self) -> Result<ErrorFn> {
        self.validate()?;
        let flags = self.flags();
        let e = match *self {
            Family::StandardMean { lambda } => {
                ErrorFn::new("standard_mean", functional(move |x| lambda * x.l2_norm()))
            }
            Family::Quantile { alpha } => ErrorFn::from_loss(ScalarLoss::koenker_bassett(alpha)?),
            Family::Cvar2 { alpha } => ErrorFn::new(
                "cvar2",
                functional(move |x| cvar_positive_integral(x) / (1.0 - alpha) - x.expectation()),
            ),
            Family::Qsa { alpha } => ErrorFn::new("qsa", functional(move |x| cvar_norm(x, alpha))),
            Family::Qsau { eps } => ErrorFn::from_loss(ScalarLoss::vapnik(eps)?),
            Family::ExpectileMse { q } => ErrorFn::from_loss(ScalarLoss::asymmetric_squared(q)?),
            Family::ExpectilePl { k } => ErrorFn::from_pwl(
                "expectile_pl",
                PwlError {
                    terms: vec![
                        PwlTerm { pieces: vec![(-1.0, 0.0)], constant: 0.0 },
                        PwlTerm { pieces: vec![(0.0, 0.0), (1.0 / k, 0.0)], constant: 0.0 },
                    ],
                },
            ),
            Family::MeanPl => ErrorFn::from_pwl(
                "mean_pl",
                PwlError {
                    terms: vec![
                        PwlTerm { pieces: vec![(0.0, 0.0), (-1.0, 0.0)], constant: 0.0 },
                        PwlTerm { pieces: vec![(0.0, 0.0), (1.0, 0.0)], constant: 0.0 },
                    ],
                },
            ),
            Family::BiasedMean { x: b } => ErrorFn::from_pwl(
                "biased_mean",
                PwlError {
                    terms: vec![
                        PwlTerm { pieces: vec![(0.0, 0.0), (-1.0, 0.0)], constant: -pos(b) },
                        PwlTerm { pieces: vec![(0.0, 0.0), (1.0, 0.0)], constant: -neg(b) },
                    ],
                },
            ),
        };
        Ok(e.with_flags(flags))
    }

    pub fn flags(&self) -> Flags {
        match *self {
            Family::StandardMean { .. } => Flags::new(true, false, false, true),
            Family::Quantile { .. } => Flags::new(true, true, true, true),
            Family::Cvar2 { .. } => Flags::new(true, true, false, true),
            Family::Qsa { .. } => Flags::new(true, true, false, true),
            Family::Qsau { eps } => Flags::new(eps == 0.0, true, true, false),
            Family::ExpectileMse { .. } => Flags::new(false, false, true, true),
            Family::ExpectilePl { .. } => Flags::new(true, true, false, true),
            Family::MeanPl => Flags::new(true, true, false, true),
            Family::BiasedMean { x } => Flags::new(x == 0.0, true, false, false),
        }
    }

    /// The quadrangle with closed-form members.
    pub fn quartet(&self) -> Result<Quartet> {
        self.validate()?;
        let flags = self.flags();
        let q = match *self {
            Family::StandardMean { lambda: l } => Quartet::new(
                format!("standard_mean({l})"),
                functional(move |x| x.expectation() + l * x.std_dev()),
                functional(move |x| l * x.std_dev()),
                functional(move |x| x.expectation() + l * x.l2_norm()),
                functional(move |x| l * x.l2_norm()),
                statistic_fn(|x| StatInterval::point(x.expectation())),
                flags,
            ),
            Family::Quantile { alpha: a } => Quartet::new(
                format!("quantile({a})"),
                functional(move |x| x.cvar(a)),
                functional(move |x| x.cvar(a) - x.expectation()),
                functional(move |x| x.expect(pos) / (1.0 - a)),
                functional(move |x| x.expect(|v| a / (1.0 - a) * pos(v) + neg(v))),
                statistic_fn(move |x| x.quantile_interval(a)),
                flags,
            ),
            Family::Cvar2 { alpha: a } => Quartet::new(
                format!("cvar2({a})"),
                functional(move |x| cvar2_risk(x, a)),
                functional(move |x| cvar2_risk(x, a) - x.expectation()),
                functional(move |x| cvar_positive_integral(x) / (1.0 - a)),
                functional(move |x| cvar_positive_integral(x) / (1.0 - a) - x.expectation()),
                statistic_fn(move |x| StatInterval::point(x.cvar(a))),
                flags,
            ),
            Family::Qsa { alpha: a } => Quartet::new(
                format!("qsa({a})"),
                functional(move |x| qsa_risk(x, a)),
                functional(move |x| qsa_risk(x, a) - x.expectation()),
                functional(move |x| cvar_norm(x, a) + x.expectation()),
                functional(move |x| cvar_norm(x, a)),
                statistic_fn(move |x| qsa_statistic(x, a)),
                flags,
            ),
            Family::Qsau { eps } => qsau_quartet(eps, flags)?,
            Family::ExpectileMse { q } => {
                let err = move |x: &DiscreteRv| x.expect(|v| q * pos(v).powi(2) + (1.0 - q) * neg(v).powi(2));
                let dev = move |x: &DiscreteRv| err(&x.shift(-expectile_unchecked(x, q)));
                Quartet::new(
                    format!("expectile_mse({q})"),
                    functional(move |x| dev(x) + x.expectation()),
                    functional(dev),
                    functional(move |x| err(x) + x.expectation()),
                    functional(err),
                    statistic_fn(move |x| StatInterval::point(expectile_unchecked(x, q))),
                    flags,
                )
            }
            Family::ExpectilePl { k } => {
                let q = (1.0 + k) / (1.0 + 2.0 * k);
                Quartet::new(
                    format!("expectile_pl({k})"),
                    functional(move |x| expectile_unchecked(x, q)),
                    functional(move |x| expectile_unchecked(x, q) - x.expectation()),
                    functional(move |x| pos(x.expect(|v| v + pos(v) / k))),
                    functional(move |x| (-x.expectation()).max(x.expect(pos) / k)),
                    statistic_fn(move |x| StatInterval::point(expectile_unchecked(x, q))),
                    flags,
                )
            }
            Family::MeanPl => Quartet::new(
                "mean_pl",
                functional(|x| {
                    let m = x.expectation();
                    m + x.expect(|v| pos(v - m))
                }),
                functional(|x| {
                    let m = x.expectation();
                    x.expect(|v| pos(v - m))
                }),
                functional(|x| x.expect(neg).max(x.expect(pos)) + x.expectation()),
                functional(|x| x.expect(neg).max(x.expect(pos))),
                statistic_fn(|x| StatInterval::point(x.expectation())),
                flags,
            ),
            Family::BiasedMean { x: b } => {
                let dev = move |x: &DiscreteRv| {
                    let m = x.expectation();
                    x.expect(|v| pos(v - m - b)) - neg(b)
                };
                let err = move |x: &DiscreteRv| (x.expect(neg) - pos(b)).max(x.expect(pos) - neg(b));
                Quartet::new(
                    format!("biased_mean({b})"),
                    functional(move |x| dev(x) + x.expectation()),
                    functional(dev),
                    functional(move |x| err(x) + x.expectation()),
                    functional(err),
                    // the error is flat at zero between the crossing and the far
                    // end of the support once the bias pushes past it
                    statistic_fn(move |x| {
                        let c = b + x.expectation();
                        if b >= 0.0 {
                            StatInterval::new(c.min(x.ess_sup()), c)
                        } else {
                            StatInterval::new(c, c.max(x.ess_inf()))
                        }
                    }),
                    flags,
                )
            }
        };
        Ok(q)
    }
}

fn qsau_quartet(eps: f64, flags: Flags) -> Result<Quartet> {
    let err = ErrorFn::from_loss(ScalarLoss::vapnik(eps)?);
    let e1 = err.clone();
    let e2 = err.clone();
    let ev = err.functional();
    let ee = err.functional();
    // closed forms inside the admissible range, the projection elsewhere
    let risk = move |x: &DiscreteRv| match qsau_risk(x, eps) {
        Ok(r) => r,
        Err(_) => project_error(&e1, x).map(|p| p.value + x.expectation()).unwrap_or(f64::NAN),
    };
    let risk2 = risk.clone();
    let stat = move |x: &DiscreteRv| {
        if qsau_precondition(x, eps).is_ok() {
            let parts = qsau_statistic_union(x, eps);
            if let (Some(first), Some(last)) = (parts.first(), parts.last()) {
                return first.hull(last);
            }
        }
        project_error(&e2, x).map(|p| p.statistic).unwrap_or(StatInterval::point(f64::NAN))
    };
    Ok(Quartet::new(
        format!("qsau({eps})"),
        functional(risk),
        functional(move |x| risk2(x) - x.expectation()),
        functional(move |x| ev(x) + x.expectation()),
        ee,
        statistic_fn(stat),
        flags,
    )
    .with_domain(std::sync::Arc::new(move |x| qsau_precondition(x, eps))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u15() -> DiscreteRv {
        DiscreteRv::uniform(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap()
    }

    #[test]
    fn quantile_family_at_sixty_percent() {
        let q = Family::Quantile { alpha: 0.6 }.quartet().unwrap();
        let v = q.evaluate(&u15()).unwrap();
        assert!((v.risk - 4.5).abs() < 1e-14);
        assert!((v.deviation - 1.5).abs() < 1e-14);
        assert_eq!(v.statistic, StatInterval::new(3.0, 4.0));
    }

    #[test]
    fn standard_mean_values() {
        let q = Family::StandardMean { lambda: 2.0 }.quartet().unwrap();
        let x = u15();
        assert!((q.risk(&x) - (3.0 + 2.0 * 2f64.sqrt())).abs() < 1e-14);
        assert!((q.error(&x) - 2.0 * 11f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn biased_mean_zero_is_mean_pl() {
        let a = Family::BiasedMean { x: 0.0 }.quartet().unwrap();
        let b = Family::MeanPl.quartet().unwrap();
        let x = DiscreteRv::new(&[-1.0, 0.5, 2.0], &[0.3, 0.3, 0.4]).unwrap();
        assert_eq!(a.risk(&x), b.risk(&x));
        assert_eq!(a.error(&x), b.error(&x));
        assert_eq!(a.statistic(&x), b.statistic(&x));
    }

    #[test]
    fn biased_mean_statistic_widens_past_the_support() {
        let q = Family::BiasedMean { x: 1.0 }.quartet().unwrap();
        let x = DiscreteRv::uniform(&[0.0, 1.0]).unwrap();
        assert_eq!(q.statistic(&x), StatInterval::new(1.0, 1.5));
        assert_eq!(q.error(&x.shift(-1.25)), 0.0);
        let q = Family::BiasedMean { x: -1.0 }.quartet().unwrap();
        assert_eq!(q.statistic(&x), StatInterval::new(-0.5, 0.0));
    }

    #[test]
    fn expectile_pl_half_on_bernoulli() {
        let q = Family::ExpectilePl { k: 0.5 }.quartet().unwrap();
        let x = DiscreteRv::uniform(&[0.0, 1.0]).unwrap();
        assert!((q.risk(&x) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn qsau_domain_is_enforced() {
        let q = Family::Qsau { eps: 3.0 }.quartet().unwrap();
        assert!(q.evaluate(&u15()).is_err());
        // the raw members stay defined through the projection
        assert!(q.risk(&u15()).is_finite());
    }

    #[test]
    fn unknown_and_invalid_parameters() {
        let get = |k: &str| if k == "alpha" { Some(1.5) } else { None };
        assert!(Family::from_name("quantile", &get).is_err());
        assert!(Family::from_name("nope", &get).is_err());
        assert!(Family::ExpectilePl { k: -1.0 }.quartet().is_err());
    }
}
