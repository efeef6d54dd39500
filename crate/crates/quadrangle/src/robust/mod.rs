//! Distributionally robust optimization, portfolio selection and
//! epi-regularization.

pub mod dro;
pub mod epi;

pub use dro::{
    cvar_grid_two_assets, cvar_portfolio_lp, dro_solve, evar_portfolio, portfolio_optimize, DroProblem, DroResult,
    PortfolioResult, PortfolioRisk, Scenarios, DENSITY_GAP_TOL,
};
pub use epi::*;
