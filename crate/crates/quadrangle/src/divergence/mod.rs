//! Divergence functions, stochastic divergences and the families and
//! quadrangles they generate.

pub mod family;
pub mod phi;
pub mod quadrangle;
pub mod stochastic;

pub use family::{
    family_eval_envelope, family_eval_perspective, indicator_family_regret, indicator_regret, minimize_over_lambda,
    Boundary, EnvelopeValue, FamilyValue, LAMBDA_MAX, LAMBDA_MIN,
};
pub use phi::{DivergenceFn, DivergenceKind, PHI_NAMES};
pub use quadrangle::{
    divergence_quadrangle, divergence_regret, evar, evar_stationarity, generic_divergence_quadrangle, tv_regret,
};
pub use stochastic::{
    classify_divergence, divergence_value, Classification, ClassificationReport, Clause, DensityFn, JForm,
    StochasticDivergenceJ,
};
