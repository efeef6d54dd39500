use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("invalid parameter {name}: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("probabilities sum to {sum}, not 1")]
    Probability { sum: f64 },

    #[error("not a subregular {kind}: {reason}")]
    Axiom { kind: &'static str, reason: String },

    #[error("unbounded: {0}")]
    Unbounded(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("no convergence after {iterations} iterations: {reason}")]
    NonConvergence { iterations: usize, reason: String },

    #[error("io: {0}")]
    Io(String),
}

impl QuadError {
    pub fn param(name: &'static str, reason: impl Into<String>) -> Self {
        QuadError::Parameter { name, reason: reason.into() }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            QuadError::NonConvergence { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, QuadError>;
