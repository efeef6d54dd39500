//! Numerical solvers: scalar convex search, dense simplex LP, subgradient and
//! gradient-sampling minimization.

pub mod lp;
pub mod scalar;
pub mod subgradient;

pub use lp::{solve_lp, LinearProgram, LpSolution, LpStatus, Relation};
pub use scalar::{
    argmin_interval_convex, argmin_interval_pwl, bisect_boundary, bracket_minimum, golden_section, minimize_scalar,
    minimize_unimodal,
};
pub use subgradient::{
    minimize_convex, minimize_subgradient, numeric_gradient, project_simplex, project_simplex_with_mean, Budget, ConvexOptions,
    MinimizeResult, SubgradientOptions,
};
