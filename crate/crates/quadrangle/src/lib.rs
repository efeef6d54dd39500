//! Risk quadrangle calculus on finitely supported random variables.
//!
//! A quadrangle ties together five objects: a risk measure, a deviation
//! measure, a regret, an error and a statistic. The library evaluates the
//! standard catalog, builds new quadrangles from errors, regrets, scalar
//! losses and divergences, works with dual envelopes, and applies the
//! machinery to regression, portfolio selection, distributionally robust
//! optimization and epi-regularization.

pub mod checks;
pub mod cli;
pub mod constructions;
pub mod divergence;
pub mod dual;
pub mod error;
pub mod io;
pub mod loss;
pub mod measures;
pub mod quartet;
pub mod regression;
pub mod robust;
pub mod rv;
pub mod sampling;
pub mod solvers;

pub use constructions::{ErrorFn, Projection, RegretFn, ScaleMode};
pub use error::{QuadError, Result};
pub use loss::{PwlError, PwlTerm, ScalarLoss};
pub use measures::Family;
pub use quartet::{Flags, Functional, QuadrangleValues, Quartet};
pub use rv::{cvar_direct, DiscreteRv, StatInterval};
