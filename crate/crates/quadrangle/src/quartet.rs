//! The quadrangle quartet: risk, deviation, regret, error and statistic.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::Result;
use crate::rv::{DiscreteRv, StatInterval};

/// A functional on random variables with values in `(-inf, +inf]`.
pub type Functional = Arc<dyn Fn(&DiscreteRv) -> f64 + Send + Sync>;
pub type StatisticFn = Arc<dyn Fn(&DiscreteRv) -> StatInterval + Send + Sync>;
pub type DomainCheck = Arc<dyn Fn(&DiscreteRv) -> Result<()> + Send + Sync>;

pub fn functional<F>(f: F) -> Functional
where
    F: Fn(&DiscreteRv) -> f64 + Send + Sync + 'static,
{
    Arc::new(f)
}

pub fn statistic_fn<F>(f: F) -> StatisticFn
where
    F: Fn(&DiscreteRv) -> StatInterval + Send + Sync + 'static,
{
    Arc::new(f)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Flags {
    pub positively_homogeneous: bool,
    /// Risk (equivalently regret) is monotone.
    pub monotone: bool,
    /// Error is `E[e(X)]` for a scalar loss `e`.
    pub expectation_type: bool,
    /// Monotone and positively homogeneous risk.
    pub coherent: bool,
    /// Regular rather than merely subregular.
    pub regular: bool,
}

impl Flags {
    pub fn new(positively_homogeneous: bool, monotone: bool, expectation_type: bool, regular: bool) -> Self {
        Flags {
            positively_homogeneous,
            monotone,
            expectation_type,
            coherent: monotone && positively_homogeneous,
            regular,
        }
    }
}

#[derive(Clone)]
pub struct Quartet {
    pub label: String,
    risk: Functional,
    deviation: Functional,
    regret: Functional,
    error: Functional,
    statistic: StatisticFn,
    pub flags: Flags,
    domain: Option<DomainCheck>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadrangleValues {
    pub risk: f64,
    pub deviation: f64,
    pub regret: f64,
    pub error: f64,
    pub statistic: StatInterval,
}

impl Quartet {
    pub fn new(
        label: impl Into<String>,
        risk: Functional,
        deviation: Functional,
        regret: Functional,
        error: Functional,
        statistic: StatisticFn,
        flags: Flags,
    ) -> Self {
        Quartet { label: label.into(), risk, deviation, regret, error, statistic, flags, domain: None }
    }

    /// Attach a precondition enforced by [`Quartet::evaluate`].
    pub fn with_domain(mut self, check: DomainCheck) -> Self {
        self.domain = Some(check);
        self
    }

    pub fn check_domain(&self, x: &DiscreteRv) -> Result<()> {
        match &self.domain {
            Some(check) => check(x),
            None => Ok(()),
        }
    }

    pub fn risk(&self, x: &DiscreteRv) -> f64 {
        (self.risk)(x)
    }

    pub fn deviation(&self, x: &DiscreteRv) -> f64 {
        (self.deviation)(x)
    }

    pub fn regret(&self, x: &DiscreteRv) -> f64 {
        (self.regret)(x)
    }

    pub fn error(&self, x: &DiscreteRv) -> f64 {
        (self.error)(x)
    }

    pub fn statistic(&self, x: &DiscreteRv) -> StatInterval {
        (self.statistic)(x)
    }

    pub fn risk_fn(&self) -> Functional {
        self.risk.clone()
    }

    pub fn deviation_fn(&self) -> Functional {
        self.deviation.clone()
    }

    pub fn regret_fn(&self) -> Functional {
        self.regret.clone()
    }

    pub fn error_fn(&self) -> Functional {
        self.error.clone()
    }

    pub fn statistic_fn(&self) -> StatisticFn {
        self.statistic.clone()
    }

    /// All five members at `x`, after the domain check.
    pub fn evaluate(&self, x: &DiscreteRv) -> Result<QuadrangleValues> {
        self.check_domain(x)?;
        Ok(QuadrangleValues {
            risk: self.risk(x),
            deviation: self.deviation(x),
            regret: self.regret(x),
            error: self.error(x),
            statistic: self.statistic(x),
        })
    }

    pub fn relabel(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }
}

impl fmt::Debug for Quartet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Quartet").field("label", &self.label).field("flags", &self.flags).finish()
    }
}
