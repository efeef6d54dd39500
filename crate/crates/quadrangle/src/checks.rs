//! Sampled invariant suite for a quadrangle.

use serde::Serialize;

use crate::constructions::{project_error, regret_functional_to_risk, ErrorFn};
use crate::quartet::Quartet;
use crate::rv::{DiscreteRv, StatInterval};

/// Tolerance for the exact identities `R - D = E[X]` and `V - E = E[X]`.
pub const IDENTITY_TOL: f64 = 1e-9;
/// Tolerance for agreement between statistic routes.
pub const STATISTIC_TOL: f64 = 1e-7;
/// Tolerance for the risk from the regret formula against the closed form.
pub const RISK_ROUTE_TOL: f64 = 1e-7;

#[derive(Clone, Debug, Serialize)]
pub struct CheckRow {
    pub name: &'static str,
    /// Largest violation over the samples.
    pub worst: f64,
    pub tol: f64,
    pub samples: usize,
    pub pass: bool,
}

fn endpoint_gap(a: &StatInterval, b: &StatInterval) -> f64 {
    (a.lo - b.lo).abs().max((a.hi - b.hi).abs())
}

struct Acc {
    name: &'static str,
    tol: f64,
    worst: f64,
    samples: usize,
}

impl Acc {
    fn new(name: &'static str, tol: f64) -> Self {
        Acc { name, tol, worst: 0.0, samples: 0 }
    }

    fn push(&mut self, violation: f64) {
        self.samples += 1;
        // NaN counts as a failure
        self.worst = if violation.is_nan() { f64::INFINITY } else { self.worst.max(violation) };
    }

    fn row(self) -> CheckRow {
        CheckRow { name: self.name, worst: self.worst, tol: self.tol, samples: self.samples, pass: self.worst <= self.tol }
    }
}

/// Identities, statistic routes, aversity and constant fidelity over `rvs`.
/// Samples outside the quartet's domain are skipped.
pub fn quadrangle_checks(q: &Quartet, err: Option<&ErrorFn>, rvs: &[DiscreteRv]) -> Vec<CheckRow> {
    let mut rd = Acc::new("risk - deviation = mean", IDENTITY_TOL);
    let mut ve = Acc::new("regret - error = mean", IDENTITY_TOL);
    let mut stat_routes = Acc::new("statistic: error projection = regret formula", STATISTIC_TOL);
    let mut stat_closed = Acc::new("statistic: closed form = error projection", STATISTIC_TOL);
    let mut risk_route = Acc::new("risk: closed form = regret formula", RISK_ROUTE_TOL);
    let mut aversity = Acc::new("risk >= mean", IDENTITY_TOL);
    let mut constant = Acc::new("risk(C) = C", IDENTITY_TOL);
    for x in rvs {
        let Ok(v) = q.evaluate(x) else { continue };
        let m = x.expectation();
        let scale = 1.0 + m.abs().max(v.risk.abs());
        rd.push((v.risk - v.deviation - m).abs() / scale);
        ve.push((v.regret - v.error - m).abs() / scale);
        aversity.push((m - v.risk).max(0.0));
        let by_regret = regret_functional_to_risk(&q.regret_fn(), x);
        match &by_regret {
            Ok(p) => risk_route.push((p.value - v.risk).abs()),
            Err(_) => risk_route.push(f64::INFINITY),
        }
        if let Some(err) = err {
            match (project_error(err, x), &by_regret) {
                (Ok(a), Ok(b)) => {
                    stat_routes.push(endpoint_gap(&a.statistic, &b.statistic));
                    stat_closed.push(endpoint_gap(&v.statistic, &a.statistic));
                }
                _ => {
                    stat_routes.push(f64::INFINITY);
                    stat_closed.push(f64::INFINITY);
                }
            }
        }
        let c = m;
        constant.push((q.risk(&DiscreteRv::constant(c)) - c).abs());
    }
    let mut rows = vec![rd.row(), ve.row(), risk_route.row()];
    if err.is_some() {
        rows.push(stat_routes.row());
        rows.push(stat_closed.row());
    }
    rows.push(aversity.row());
    rows.push(constant.row());
    rows
}
