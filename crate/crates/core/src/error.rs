//! Error types shared across the toolkit.

use thiserror::Error;

/// Errors raised while reading or validating a grid case.
#[derive(Debug, Error)]
pub enum CaseError {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("structural error: {0}")]
    Structure(String),
}

impl CaseError {
    pub fn parse(line: usize, message: impl Into<String>) -> Self {
        CaseError::Parse {
            line,
            message: message.into(),
        }
    }

    pub fn structure(message: impl Into<String>) -> Self {
        CaseError::Structure(message.into())
    }
}

/// Errors raised by the numerical solvers.
#[derive(Debug, Error)]
pub enum SolveError {
    #[error("topology error: {0}")]
    Topology(String),
    #[error("singular system: {0}")]
    Singular(String),
    #[error("did not converge within {iterations} iterations ({context})")]
    IterationCap { iterations: usize, context: String },
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("unbounded problem: {0}")]
    Unbounded(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}
